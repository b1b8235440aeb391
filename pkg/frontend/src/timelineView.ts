/** Assembled progression timeline with JSON export. */

import { playTriad } from './audio';
import type { SessionState } from './state';

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

export function createTimelineView(state: SessionState): {
  element: HTMLElement;
  refresh: () => void;
} {
  const panel = el('section', { class: 'panel', id: 'timeline-panel' });
  panel.append(el('h2', {}, 'Timeline'));
  const list = el('ol', { id: 'timeline' });
  const exportButton = el('button', { id: 'export-timeline' }, 'Export JSON');

  exportButton.addEventListener('click', () => {
    const payload = JSON.stringify(state.exportTimeline(), null, 2);
    const blob = new Blob([payload], { type: 'application/json' });
    const link = el('a', {
      href: URL.createObjectURL(blob),
      download: 'timeline.json',
    });
    link.click();
    URL.revokeObjectURL(link.href);
  });

  function refresh(): void {
    list.replaceChildren();
    for (const entry of state.timeline) {
      const item = el('li', { class: `timeline-entry ${entry.source}` });
      const label = el('span', {}, entry.chords.join(' '));
      const play = el('button', { class: 'entry-play' }, '▶');
      play.addEventListener('click', () => {
        entry.chords.forEach((symbol, i) => setTimeout(() => playTriad(symbol, 0.6), i * 650));
      });
      item.append(label, play);
      list.append(item);
    }
  }

  panel.append(list, exportButton);
  return { element: panel, refresh };
}
