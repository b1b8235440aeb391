/** Session state: keyword editing, suggestion cards, and the chord timeline.
 *
 * The keyword editor field is the source of truth for what gets sent to the
 * backend; chips are suggestions that toggle their keyword in and out of the
 * field without touching anything the user typed by hand. Timeline entries
 * are only ever copied from backend responses held in the session.
 */

import type { KeywordChip, Suggestion, TimelineEntry, TimelineExport } from './types';

export function splitKeywords(field: string): string[] {
  return field
    .split(',')
    .map((k) => k.trim())
    .filter((k) => k.length > 0);
}

export class SessionState {
  keywordField = '';
  chips: KeywordChip[] = [];
  key = 'C';
  mode = 'Maj';
  bars: 3 | 4 = 4;
  cards: Suggestion[] = [];
  timeline: TimelineEntry[] = [];

  keywords(): string[] {
    return splitKeywords(this.keywordField);
  }

  /** Replace the suggested chips (after regeneration); the field is untouched. */
  setChips(chips: { keyword: string; origin: KeywordChip['origin'] }[]): void {
    const present = new Set(this.keywords().map((k) => k.toLowerCase()));
    this.chips = chips.map((chip) => ({
      ...chip,
      selected: present.has(chip.keyword.toLowerCase()),
    }));
  }

  /** Toggle a chip: selection inserts its keyword into the field, deselection
   * removes exactly that keyword and leaves manual entries alone. */
  toggleChip(index: number): void {
    const chip = this.chips[index];
    if (!chip) return;
    const words = this.keywords();
    if (chip.selected) {
      this.keywordField = words
        .filter((w) => w.toLowerCase() !== chip.keyword.toLowerCase())
        .join(', ');
    } else if (!words.some((w) => w.toLowerCase() === chip.keyword.toLowerCase())) {
      this.keywordField = [...words, chip.keyword].join(', ');
    }
    chip.selected = !chip.selected;
  }

  setCards(suggestions: Suggestion[]): void {
    this.cards = suggestions;
  }

  appendSuggestion(index: number): void {
    const card = this.cards[index];
    if (!card) return;
    this.timeline.push({ chords: [...card.chords], source: 'suggestion' });
  }

  appendTranscribed(symbol: string): void {
    this.timeline.push({ chords: [symbol], source: 'transcription' });
  }

  exportTimeline(): TimelineExport {
    return {
      key: this.key,
      mode: this.mode,
      entries: this.timeline.map((entry) => ({ ...entry, chords: [...entry.chords] })),
    };
  }
}
