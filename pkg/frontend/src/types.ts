/** Wire types for the chordsmith HTTP API and the session model. */

export interface KeywordChip {
  keyword: string;
  origin: 'llm_suggested' | 'user_written';
  selected: boolean;
}

export interface KeywordsResponse {
  keywords: { keyword: string; origin: 'llm_suggested' | 'user_written' }[];
}

export interface Suggestion {
  chords: string[];
  provenance: 'accepted' | 'topk_fill';
}

export interface ChordsResponse {
  suggestions: Suggestion[];
  audit_id: string;
}

export interface TimedChord {
  symbol: string;
  start_s: number;
  end_s: number;
}

export interface TranscribeResponse {
  detected_key: { root: string; mode: string };
  chords: TimedChord[];
  converted: TimedChord[] | null;
}

export interface TimelineEntry {
  chords: string[];
  source: 'suggestion' | 'transcription';
}

export interface TimelineExport {
  key: string;
  mode: string;
  entries: TimelineEntry[];
}

export const KEYS = ['C', 'G', 'D', 'A', 'E', 'B', 'F#', 'Db', 'Ab', 'Eb', 'Bb', 'F'] as const;
export const MODES = ['Maj', 'Min', 'Dor', 'Phr', 'Lyd', 'Mix', 'Loc', 'Hmin', 'Phdm'] as const;
export const MAX_SEGMENT_SECONDS = 30;
