import { ApiClient } from './api';
import { createChordPanel } from './chordPanel';
import { createKeywordPanel } from './keywordPanel';
import { SessionState } from './state';
import { createTimelineView } from './timelineView';
import { createTranscribePanel } from './transcribePanel';

export function mountApp(root: HTMLElement, baseUrl: string): SessionState {
  const api = new ApiClient(baseUrl);
  const state = new SessionState();
  const timeline = createTimelineView(state);
  const deps = { api, state, onChange: timeline.refresh };

  root.replaceChildren(
    createKeywordPanel(deps),
    createChordPanel(deps),
    createTranscribePanel(deps),
    timeline.element,
  );
  return state;
}

const root = document.getElementById('app');
if (root) {
  const baseUrl = root.dataset.api ?? 'http://127.0.0.1:8000';
  mountApp(root, baseUrl);
}
