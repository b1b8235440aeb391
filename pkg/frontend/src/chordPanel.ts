/** Key/mode/bars selection -> four suggestion cards -> timeline appends. */

import { playTriad } from './audio';
import type { PanelDeps } from './keywordPanel';
import { KEYS, MODES } from './types';

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

function select(id: string, options: readonly string[], value: string): HTMLSelectElement {
  const node = el('select', { id });
  for (const option of options) {
    node.append(el('option', { value: option }, option));
  }
  node.value = value;
  return node;
}

export function createChordPanel({ api, state, onChange }: PanelDeps): HTMLElement {
  const panel = el('section', { class: 'panel', id: 'chord-panel' });
  panel.append(el('h2', {}, 'Chord Suggestions'));

  const keySelect = select('key-select', KEYS, state.key);
  const modeSelect = select('mode-select', MODES, state.mode);
  const barsSelect = select('bars-select', ['3', '4'], String(state.bars));
  const generateButton = el('button', { id: 'generate-chords' }, 'Generate Chords');
  const errorBanner = el('div', { class: 'error-banner', id: 'chord-error' });
  const cardGrid = el('div', { id: 'card-grid' });

  keySelect.addEventListener('change', () => (state.key = keySelect.value));
  modeSelect.addEventListener('change', () => (state.mode = modeSelect.value));
  barsSelect.addEventListener('change', () => (state.bars = Number(barsSelect.value) as 3 | 4));

  function renderCards(): void {
    cardGrid.replaceChildren();
    state.cards.forEach((card, index) => {
      const cardNode = el('div', { class: 'card' });
      const selectButton = el('button', { class: 'card-select' }, card.chords.join(' '));
      selectButton.addEventListener('click', () => {
        state.appendSuggestion(index);
        onChange?.();
      });
      const playButton = el('button', { class: 'card-play', title: 'Audition triads' }, '▶');
      playButton.addEventListener('click', () => {
        card.chords.forEach((symbol, i) => {
          setTimeout(() => playTriad(symbol, 0.6), i * 650);
        });
      });
      cardNode.append(
        selectButton,
        playButton,
        el('span', { class: 'provenance' }, card.provenance),
      );
      cardGrid.append(cardNode);
    });
  }

  generateButton.addEventListener('click', async () => {
    errorBanner.textContent = '';
    const keywords = state.keywords();
    if (!keywords.length) {
      errorBanner.textContent = 'Enter at least one keyword first.';
      return;
    }
    generateButton.disabled = true;
    try {
      const response = await api.chords({
        keywords,
        key: state.key,
        mode: state.mode,
        bars: state.bars,
      });
      state.setCards(response.suggestions);
      renderCards();
      onChange?.();
    } catch (err) {
      errorBanner.textContent = err instanceof Error ? err.message : String(err);
    } finally {
      generateButton.disabled = false;
    }
  });

  const controls = el('div', { class: 'controls' });
  controls.append(
    el('label', {}, 'Key '),
    keySelect,
    el('label', {}, ' Mode '),
    modeSelect,
    el('label', {}, ' Bars '),
    barsSelect,
  );
  panel.append(controls, generateButton, errorBanner, cardGrid);
  return panel;
}
