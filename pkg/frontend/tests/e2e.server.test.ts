// @vitest-environment jsdom
/**
 * End-to-end: spawn the real mock-backed backend, mount the app in jsdom,
 * and click through the whole flow over live HTTP. External LLM networking
 * stays disabled (the backend runs its fixture provider).
 */
import { spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync } from 'node:fs';
import net from 'node:net';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it, vi } from 'vitest';

import { mountApp } from '../src/main';
import type { SessionState } from '../src/state';

let server: ChildProcess;
let baseUrl = '';
let state: SessionState;

/** Every chord symbol string the backend has sent in any response body. */
const backendSymbols = new Set<string>();
let outboundRequests = 0;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = net.createServer();
    probe.listen(0, '127.0.0.1', () => {
      const port = (probe.address() as net.AddressInfo).port;
      probe.close(() => resolve(port));
    });
    probe.on('error', reject);
  });
}

function collectSymbols(payload: unknown): void {
  if (Array.isArray(payload)) {
    payload.forEach(collectSymbols);
    return;
  }
  if (payload && typeof payload === 'object') {
    const record = payload as Record<string, unknown>;
    if (Array.isArray(record.chords)) {
      for (const item of record.chords) {
        if (typeof item === 'string') backendSymbols.add(item);
      }
    }
    if (typeof record.symbol === 'string') backendSymbols.add(record.symbol);
    Object.values(record).forEach(collectSymbols);
  }
}

async function waitFor(check: () => boolean, what: string, timeoutMs = 10_000): Promise<void> {
  const start = Date.now();
  while (!check()) {
    if (Date.now() - start > timeoutMs) throw new Error(`timed out waiting for ${what}`);
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
}

beforeAll(async () => {
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  server = spawn('python3', ['-m', 'chordsmith.cli', 'serve', '--port', String(port)], {
    cwd: mkdtempSync(join(tmpdir(), 'chordsmith-e2e-')),
    stdio: 'ignore',
  });

  const realFetch = globalThis.fetch.bind(globalThis);
  const spyFetch = (async (input: RequestInfo | URL, init?: RequestInit) => {
    outboundRequests += 1;
    const response = await realFetch(input, init);
    const clone = response.clone();
    try {
      collectSymbols(await clone.json());
    } catch {
      // non-JSON response
    }
    return response;
  }) as typeof fetch;
  vi.stubGlobal('fetch', spyFetch);

  const deadline = Date.now() + 45_000;
  for (;;) {
    try {
      const ok = await realFetch(`${baseUrl}/health`);
      if (ok.ok) break;
    } catch {
      // still booting
    }
    if (Date.now() > deadline) throw new Error('backend did not come up');
    await new Promise((resolve) => setTimeout(resolve, 250));
  }

  const root = document.createElement('main');
  document.body.append(root);
  state = mountApp(root, baseUrl);
}, 60_000);

afterAll(() => {
  server?.kill();
});

describe('full session against the live mock-backed server', () => {
  it('extracts keywords and selection mutates the editor field', async () => {
    const note = document.querySelector('#note-text') as HTMLTextAreaElement;
    note.value = 'city lights after the rain';
    (document.querySelector('#generate-keywords') as HTMLButtonElement).click();
    await waitFor(() => document.querySelectorAll('.chip').length > 0, 'keyword chips');

    const chips = document.querySelectorAll<HTMLButtonElement>('.chip');
    expect(chips.length).toBeGreaterThanOrEqual(3);
    chips[0].click();
    chips[1].click();
    const field = document.querySelector('#keyword-field') as HTMLTextAreaElement;
    expect(field.value).toBe(`${chips[0].textContent}, ${chips[1].textContent}`);

    chips[0].click();
    expect(field.value).toBe(chips[1].textContent);
  }, 20_000);

  it('generates exactly four cards and clicks append to the timeline', async () => {
    (document.querySelector('#key-select') as HTMLSelectElement).value = 'G';
    (document.querySelector('#key-select') as HTMLSelectElement).dispatchEvent(new Event('change'));
    (document.querySelector('#generate-chords') as HTMLButtonElement).click();
    await waitFor(() => document.querySelectorAll('.card').length > 0, 'suggestion cards');

    const cards = document.querySelectorAll<HTMLButtonElement>('.card-select');
    expect(cards).toHaveLength(4);
    for (const card of cards) {
      expect(card.textContent?.split(' ')).toHaveLength(4); // bars
    }

    cards[0].click();
    cards[2].click();
    expect(state.timeline).toHaveLength(2);
    expect(document.querySelectorAll('#timeline .timeline-entry')).toHaveLength(2);

    // regenerate: cards replaced, timeline untouched
    (document.querySelector('#generate-chords') as HTMLButtonElement).click();
    await waitFor(
      () => !(document.querySelector('#generate-chords') as HTMLButtonElement).disabled,
      'regeneration',
    );
    expect(document.querySelectorAll('.card')).toHaveLength(4);
    expect(state.timeline).toHaveLength(2);
  }, 20_000);

  it('rejects a 31-second transcription window before any request', async () => {
    const before = outboundRequests;
    (document.querySelector('#audio-url') as HTMLInputElement).value = 'http://x/song.mp3';
    (document.querySelector('#start-s') as HTMLInputElement).value = '0';
    (document.querySelector('#end-s') as HTMLInputElement).value = '31';
    (document.querySelector('#transcribe') as HTMLButtonElement).click();
    await new Promise((resolve) => setTimeout(resolve, 50));
    expect(document.querySelector('#transcribe-error')?.textContent).toMatch(/30 seconds/);
    expect(outboundRequests).toBe(before);
  });

  it('transcribes a valid window, converts to the session key, and appends', async () => {
    (document.querySelector('#end-s') as HTMLInputElement).value = '12';
    const toggle = document.querySelector('#convert-toggle') as HTMLInputElement;
    toggle.checked = true;
    toggle.dispatchEvent(new Event('change'));
    (document.querySelector('#transcribe') as HTMLButtonElement).click();
    await waitFor(() => document.querySelectorAll('.timed-chord').length > 0, 'transcription');

    expect(document.querySelector('#detected-key')?.textContent).toContain('Gb Min');
    const chordButtons = document.querySelectorAll<HTMLButtonElement>('.timed-chord');
    const timelineBefore = state.timeline.length;
    chordButtons[0].click();
    expect(state.timeline).toHaveLength(timelineBefore + 1);
    expect(state.timeline.at(-1)?.source).toBe('transcription');
  }, 20_000);

  it('never fabricates chords: every rendered symbol came from the backend', () => {
    const rendered: string[] = [];
    document
      .querySelectorAll<HTMLButtonElement>('.card-select')
      .forEach((card) => rendered.push(...(card.textContent ?? '').split(' ')));
    document
      .querySelectorAll<HTMLButtonElement>('.timed-chord')
      .forEach((button) => rendered.push(button.textContent ?? ''));
    for (const entry of state.timeline) rendered.push(...entry.chords);

    expect(rendered.length).toBeGreaterThan(0);
    for (const symbol of rendered) {
      expect(backendSymbols.has(symbol), `fabricated symbol ${symbol}`).toBe(true);
    }
  });

  it('exports the timeline in the published schema shape', () => {
    const exported = state.exportTimeline();
    expect(exported.key).toBe('G');
    expect(exported.entries.length).toBeGreaterThanOrEqual(3);
    for (const entry of exported.entries) {
      expect(entry.chords.length).toBeGreaterThan(0);
      expect(['suggestion', 'transcription']).toContain(entry.source);
    }
  });
});
