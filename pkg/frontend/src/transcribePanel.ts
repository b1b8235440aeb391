/** Audio reference + time window -> transcribed chord timeline -> appends. */

import { playTriad } from './audio';
import type { PanelDeps } from './keywordPanel';
import type { TimedChord, TranscribeResponse } from './types';
import { MAX_SEGMENT_SECONDS } from './types';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = '',
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) node.setAttribute(name, value);
  if (text) node.textContent = text;
  return node;
}

export function validateWindow(startS: number, endS: number): string | null {
  if (Number.isNaN(startS) || Number.isNaN(endS)) return 'Enter start and end times.';
  if (startS < 0 || endS <= startS) return 'Need 0 <= start < end.';
  if (endS - startS > MAX_SEGMENT_SECONDS) {
    return `Segment is limited to ${MAX_SEGMENT_SECONDS} seconds.`;
  }
  return null;
}

export function createTranscribePanel({ api, state, onChange }: PanelDeps): HTMLElement {
  const panel = el('section', { class: 'panel', id: 'transcribe-panel' });
  panel.append(el('h2', {}, 'Transcribe Audio'));

  const urlInput = el('input', { id: 'audio-url', type: 'url', placeholder: 'Audio URL' });
  const fileInput = el('input', { id: 'audio-file', type: 'file', accept: 'audio/*' });
  const startInput = el('input', { id: 'start-s', type: 'number', value: '0', min: '0' });
  const endInput = el('input', { id: 'end-s', type: 'number', value: '10', min: '0' });
  const convertToggle = el('input', { id: 'convert-toggle', type: 'checkbox' });
  const transcribeButton = el('button', { id: 'transcribe' }, 'Transcribe');
  const errorBanner = el('div', { class: 'error-banner', id: 'transcribe-error' });
  const detectedLabel = el('div', { id: 'detected-key' });
  const chordList = el('div', { id: 'transcription-list' });

  let lastResponse: TranscribeResponse | null = null;

  function displayedChords(): TimedChord[] {
    if (!lastResponse) return [];
    return convertToggle.checked && lastResponse.converted
      ? lastResponse.converted
      : lastResponse.chords;
  }

  function renderChords(): void {
    chordList.replaceChildren();
    for (const timed of displayedChords()) {
      const button = el(
        'button',
        { class: 'timed-chord', title: `${timed.start_s.toFixed(1)}–${timed.end_s.toFixed(1)}s` },
        timed.symbol,
      );
      button.addEventListener('click', () => {
        state.appendTranscribed(timed.symbol);
        playTriad(timed.symbol, 0.6);
        onChange?.();
      });
      chordList.append(button);
    }
  }

  convertToggle.addEventListener('change', renderChords);

  transcribeButton.addEventListener('click', async () => {
    errorBanner.textContent = '';
    const startS = Number(startInput.value);
    const endS = Number(endInput.value);
    const validation = validateWindow(startS, endS);
    if (validation) {
      errorBanner.textContent = validation;
      return;
    }
    const url = urlInput.value.trim();
    const file = fileInput.files?.[0];
    if (!url && !file) {
      errorBanner.textContent = 'Provide an audio URL or file.';
      return;
    }
    transcribeButton.disabled = true;
    try {
      lastResponse = await api.transcribe({
        audio_url: url || undefined,
        file_id: file?.name,
        start_s: startS,
        end_s: endS,
        convert_to_key: convertToggle.checked ? state.key : undefined,
        convert_to_mode: convertToggle.checked ? state.mode : undefined,
      });
      const detected = lastResponse.detected_key;
      detectedLabel.textContent = `Detected: ${detected.root} ${detected.mode}`;
      renderChords();
      onChange?.();
    } catch (err) {
      errorBanner.textContent = err instanceof Error ? err.message : String(err);
    } finally {
      transcribeButton.disabled = false;
    }
  });

  const windowRow = el('div', { class: 'controls' });
  windowRow.append(
    el('label', {}, 'Start (s) '),
    startInput,
    el('label', {}, ' End (s) '),
    endInput,
    el('label', { for: 'convert-toggle' }, ' Convert to session key '),
    convertToggle,
  );
  panel.append(urlInput, fileInput, windowRow, transcribeButton, errorBanner, detectedLabel, chordList);
  return panel;
}
