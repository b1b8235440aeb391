/** Block-triad audition of a chord symbol with WebAudio.
 *
 * This is a preview aid, not a renderer: only the root and a coarse quality
 * (major/minor/diminished/augmented) are read from the symbol, and the
 * symbol itself always comes from a backend response.
 */

const LETTER_INDEX: Record<string, number> = { C: 0, D: 2, E: 4, F: 5, G: 7, A: 9, B: 11 };
const ACCIDENTAL_OFFSET: Record<string, number> = { '': 0, '#': 1, b: -1, x: 2, bb: -2 };

export function rootChroma(symbol: string): number | null {
  const match = /^([A-Ga-g])(bb|x|#|b)?/.exec(symbol);
  if (!match) return null;
  const letter = match[1].toUpperCase();
  const accidental = match[2] ?? '';
  return ((LETTER_INDEX[letter] + ACCIDENTAL_OFFSET[accidental]) % 12 + 12) % 12;
}

export function triadIntervals(symbol: string): [number, number, number] {
  const rest = symbol.replace(/^([A-Ga-g])(bb|x|#|b)?/, '');
  if (rest.startsWith('dim')) return [0, 3, 6];
  if (rest.startsWith('aug')) return [0, 4, 8];
  if (/^m(?!aj)/.test(rest)) return [0, 3, 7];
  return [0, 4, 7];
}

/** Frequencies of a one-octave block triad rooted near middle C (A4 = 440). */
export function triadFrequencies(symbol: string): number[] {
  const chroma = rootChroma(symbol);
  if (chroma === null) return [];
  const rootMidi = 60 + chroma;
  return triadIntervals(symbol).map((step) => 440 * 2 ** ((rootMidi + step - 69) / 12));
}

let context: AudioContext | null = null;

/** Play the triad for `seconds`; returns false when WebAudio is unavailable. */
export function playTriad(symbol: string, seconds = 1.2): boolean {
  const frequencies = triadFrequencies(symbol);
  const Ctor = (globalThis as { AudioContext?: typeof AudioContext }).AudioContext;
  if (!frequencies.length || !Ctor) return false;
  context = context ?? new Ctor();
  const now = context.currentTime;
  for (const frequency of frequencies) {
    const osc = context.createOscillator();
    const gain = context.createGain();
    osc.type = 'triangle';
    osc.frequency.value = frequency;
    gain.gain.setValueAtTime(0.0001, now);
    gain.gain.exponentialRampToValueAtTime(0.15, now + 0.02);
    gain.gain.exponentialRampToValueAtTime(0.0001, now + seconds);
    osc.connect(gain).connect(context.destination);
    osc.start(now);
    osc.stop(now + seconds);
  }
  return true;
}
