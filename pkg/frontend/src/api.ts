/** Thin typed client for the chordsmith HTTP API. */

import type { ChordsResponse, KeywordsResponse, TranscribeResponse } from './types';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
  }
}

async function parseOrThrow<T>(response: Response): Promise<T> {
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = await response.json();
      if (typeof body.detail === 'string') detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export interface KeywordsRequest {
  image?: File | Blob;
  text?: string;
  userKeywords?: string;
}

export interface ChordsRequest {
  keywords: string[];
  key: string;
  mode: string;
  bars: number;
}

export interface TranscribeRequest {
  audio_url?: string;
  file_id?: string;
  start_s: number;
  end_s: number;
  convert_to_key?: string;
  convert_to_mode?: string;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  async health(): Promise<boolean> {
    const response = await fetch(`${this.baseUrl}/health`);
    return response.ok;
  }

  async keywords(request: KeywordsRequest): Promise<KeywordsResponse> {
    const form = new FormData();
    if (request.image) form.append('image', request.image);
    if (request.text) form.append('text', request.text);
    if (request.userKeywords) form.append('user_keywords', request.userKeywords);
    const response = await fetch(`${this.baseUrl}/keywords`, { method: 'POST', body: form });
    return parseOrThrow<KeywordsResponse>(response);
  }

  async chords(request: ChordsRequest): Promise<ChordsResponse> {
    const response = await fetch(`${this.baseUrl}/chords`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(request),
    });
    return parseOrThrow<ChordsResponse>(response);
  }

  async transcribe(request: TranscribeRequest): Promise<TranscribeResponse> {
    const response = await fetch(`${this.baseUrl}/transcribe`, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(request),
    });
    return parseOrThrow<TranscribeResponse>(response);
  }
}
