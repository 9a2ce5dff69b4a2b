// Browser entry point: a two-view hash router. All logic lives in the
// controllers; this file only wires DOM events and re-renders.
import { AnnotateController, renderAnnotate } from './annotate.js';
import { ApiClient } from './api.js';
import { DraftStore } from './drafts.js';
import { escapeHtml } from './format.js';
import { LeaderboardController, renderLeaderboard } from './leaderboard.js';
const POLL_MS = 5000;
const root = document.getElementById('app');
const api = new ApiClient((url, init) => fetch(url, init));
let pollTimer;
function renderHome() {
    root.innerHTML = `
    <h1>ragarena</h1>
    <p>Pick a view:</p>
    <ul>
      <li><a href="#/annotate">Annotate answers</a></li>
      <li>
        Leaderboard: open <code>#/leaderboard/&lt;session-id&gt;</code>, for example
        <a href="#/leaderboard/live-1">#/leaderboard/live-1</a>
      </li>
    </ul>`;
}
function renderLogin(message = '') {
    const savedId = sessionStorage.getItem('ragarena:annotator') ?? '';
    root.innerHTML = `
    <h1>Annotator sign-in</h1>
    ${message ? `<div class="banner banner-error">${escapeHtml(message)}</div>` : ''}
    <form id="login-form">
      <label>Annotator id <input name="annotator" value="${escapeHtml(savedId)}" required></label>
      <label>Access token <input name="token" type="password" required></label>
      <button>Start</button>
    </form>`;
    const form = document.getElementById('login-form');
    form.addEventListener('submit', (event) => {
        event.preventDefault();
        const data = new FormData(form);
        const annotator = String(data.get('annotator') ?? '').trim();
        const token = String(data.get('token') ?? '').trim();
        if (!annotator || !token)
            return;
        sessionStorage.setItem('ragarena:annotator', annotator);
        sessionStorage.setItem('ragarena:token', token);
        void startAnnotation(annotator, token);
    });
}
async function startAnnotation(annotator, token) {
    const controller = new AnnotateController(api, new DraftStore(localStorage), annotator, token);
    const repaint = () => {
        root.innerHTML = renderAnnotate(controller.state);
    };
    root.addEventListener('change', (event) => {
        const input = event.target;
        const metric = input.dataset?.metric;
        if (!metric)
            return;
        controller.setScore(metric, Number(input.dataset.value));
        repaint();
    });
    root.addEventListener('click', (event) => {
        const target = event.target;
        if (target.id === 'submit-btn') {
            void controller.submit().then(repaint);
        }
        else if (target.id === 'retry-btn') {
            void controller.loadNext().then(repaint);
        }
    });
    repaint();
    await controller.loadNext();
    repaint();
}
async function startLeaderboard(sessionId) {
    const controller = new LeaderboardController(api, sessionId);
    const repaint = () => {
        root.innerHTML = `<h1>Leaderboard: ${escapeHtml(sessionId)}</h1>` + renderLeaderboard(controller.state);
    };
    repaint();
    await controller.poll();
    repaint();
    pollTimer = window.setInterval(async () => {
        await controller.poll();
        repaint();
    }, POLL_MS);
}
function route() {
    if (pollTimer !== undefined) {
        window.clearInterval(pollTimer);
        pollTimer = undefined;
    }
    const hash = window.location.hash;
    const leaderboard = hash.match(/^#\/leaderboard\/(.+)$/);
    if (leaderboard) {
        void startLeaderboard(decodeURIComponent(leaderboard[1]));
        return;
    }
    if (hash.startsWith('#/annotate')) {
        const annotator = sessionStorage.getItem('ragarena:annotator');
        const token = sessionStorage.getItem('ragarena:token');
        if (annotator && token) {
            void startAnnotation(annotator, token);
        }
        else {
            renderLogin();
        }
        return;
    }
    renderHome();
}
window.addEventListener('hashchange', route);
route();
