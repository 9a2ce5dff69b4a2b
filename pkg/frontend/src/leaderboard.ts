// Polling leaderboard view. A failed poll never blanks the table: the last
// good rows stay up behind a stale-data banner with the fetch time, so a
// projector in a room full of teams degrades gracefully.

import { ApiClient, ApiError, LeaderboardEntry } from './api.js';
import { escapeHtml, formatClock, formatRank, formatScore } from './format.js';

export interface LeaderboardState {
  sessionId: string;
  entries: LeaderboardEntry[] | null;
  lastFetched: Date | null;
  stale: boolean;
  missing: boolean;
}

export class LeaderboardController {
  state: LeaderboardState;

  constructor(
    private api: ApiClient,
    sessionId: string,
    private now: () => Date = () => new Date(),
  ) {
    this.state = { sessionId, entries: null, lastFetched: null, stale: false, missing: false };
  }

  async poll(): Promise<void> {
    try {
      const payload = await this.api.fetchLeaderboard(this.state.sessionId);
      this.state.entries = payload.entries;
      this.state.lastFetched = this.now();
      this.state.stale = false;
      this.state.missing = false;
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.state.missing = true;
        this.state.entries = null;
        return;
      }
      // keep whatever we had; just flag it as old
      this.state.stale = true;
    }
  }
}

export function renderLeaderboard(state: LeaderboardState): string {
  if (state.missing) {
    return `<p class="status">No session named “${escapeHtml(state.sessionId)}”.</p>`;
  }
  if (state.entries === null) {
    return '<p class="status">Waiting for the first leaderboard fetch…</p>';
  }
  const banner = state.stale && state.lastFetched
    ? `<div class="banner banner-stale">Server unreachable; showing data fetched at ${formatClock(state.lastFetched)}.</div>`
    : '';
  const rows = state.entries
    .map(
      (e) => `
      <tr class="${e.rank === null ? 'baseline-row' : ''}">
        <td class="rank">${formatRank(e.rank)}</td>
        <td>${escapeHtml(e.team_name)}</td>
        <td class="num">${formatScore(e.correctness)}</td>
        <td class="num">${formatScore(e.faithfulness)}</td>
      </tr>`,
    )
    .join('');
  return `
    ${banner}
    <table class="leaderboard">
      <thead>
        <tr><th>Rank</th><th>Team</th><th>Correctness</th><th>Faithfulness</th></tr>
      </thead>
      <tbody>${rows}</tbody>
    </table>
    ${state.lastFetched ? `<p class="fetched-at">Last updated ${formatClock(state.lastFetched)}</p>` : ''}`;
}
