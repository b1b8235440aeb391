/** Inspiration inputs -> suggested keyword chips -> editable keyword field. */

import type { ApiClient } from './api';
import type { SessionState } from './state';

export interface PanelDeps {
  api: ApiClient;
  state: SessionState;
  onChange?: () => void;
}

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

export function createKeywordPanel({ api, state, onChange }: PanelDeps): HTMLElement {
  const panel = el('section', { class: 'panel', id: 'keyword-panel' });
  panel.append(el('h2', {}, 'Inspiration'));

  const imageInput = el('input', { type: 'file', id: 'image-file', accept: 'image/*' });
  const noteInput = el('textarea', { id: 'note-text', placeholder: 'Describe a scene, paste a note…' });
  const generateButton = el('button', { id: 'generate-keywords' }, 'Generate Keywords');
  const errorBanner = el('div', { class: 'error-banner', id: 'keyword-error' });
  const chipRow = el('div', { id: 'chip-row' });
  const fieldLabel = el('label', { for: 'keyword-field' }, 'Keywords');
  const field = el('textarea', { id: 'keyword-field', placeholder: 'keywords, comma, separated' });

  field.addEventListener('input', () => {
    state.keywordField = field.value;
    syncChips();
    onChange?.();
  });

  function syncChips(): void {
    const present = new Set(state.keywords().map((k) => k.toLowerCase()));
    state.chips.forEach((chip, i) => {
      chip.selected = present.has(chip.keyword.toLowerCase());
      chipRow.children[i]?.classList.toggle('selected', chip.selected);
    });
  }

  function renderChips(): void {
    chipRow.replaceChildren();
    state.chips.forEach((chip, index) => {
      const button = el(
        'button',
        { class: `chip ${chip.origin}${chip.selected ? ' selected' : ''}` },
        chip.keyword,
      );
      button.addEventListener('click', () => {
        state.toggleChip(index);
        field.value = state.keywordField;
        button.classList.toggle('selected', chip.selected);
        onChange?.();
      });
      chipRow.append(button);
    });
  }

  generateButton.addEventListener('click', async () => {
    errorBanner.textContent = '';
    const image = imageInput.files?.[0];
    const text = noteInput.value.trim();
    if (!image && !text && !state.keywordField.trim()) {
      errorBanner.textContent = 'Add an image, a note, or some keywords first.';
      return;
    }
    generateButton.disabled = true;
    try {
      const response = await api.keywords({
        image,
        text: text || undefined,
        userKeywords: state.keywordField.trim() || undefined,
      });
      state.setChips(response.keywords);
      renderChips();
      onChange?.();
    } catch (err) {
      errorBanner.textContent = err instanceof Error ? err.message : String(err);
    } finally {
      generateButton.disabled = false;
    }
  });

  panel.append(imageInput, noteInput, generateButton, errorBanner, chipRow, fieldLabel, field);
  return panel;
}
