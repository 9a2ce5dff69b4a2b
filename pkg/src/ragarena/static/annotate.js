// One answer on screen at a time: the server hands out the next unscored
// (question, answer) unit, the annotator fills three Likert scores, and a
// successful post advances to the next unit. The server never tells us which
// team wrote an answer and this module never asks.
import { ApiError } from './api.js';
import { EMPTY_DRAFT } from './drafts.js';
import { escapeHtml } from './format.js';
export const METRICS = ['coverage', 'relatedness', 'quality'];
export const LIKERT = [0, 1, 2];
export class AnnotateController {
    constructor(api, drafts, annotatorId, token) {
        this.api = api;
        this.drafts = drafts;
        this.annotatorId = annotatorId;
        this.token = token;
        this.state = {
            phase: 'loading',
            task: null,
            current: null,
            scores: { ...EMPTY_DRAFT },
            error: null,
            done: null,
        };
    }
    async loadNext() {
        this.state.phase = 'loading';
        this.state.error = null;
        let task;
        try {
            task = await this.api.fetchTask(this.annotatorId, this.token);
        }
        catch (err) {
            this.state.phase = 'error';
            this.state.error = describe(err);
            return;
        }
        if (task.done) {
            this.state = { ...this.state, phase: 'done', task: null, current: null, done: task };
            return;
        }
        const current = task.answers[0];
        this.state = {
            phase: 'scoring',
            task,
            current,
            scores: this.drafts.load(this.annotatorId, current.answer_id),
            error: null,
            done: null,
        };
    }
    // Returns whether the value was accepted; anything outside {0, 1, 2} is
    // refused here so an invalid score can never reach the wire.
    setScore(metric, value) {
        if (!LIKERT.includes(value))
            return false;
        if (this.state.current === null)
            return false;
        this.state.scores = { ...this.state.scores, [metric]: value };
        this.drafts.save(this.annotatorId, this.state.current.answer_id, this.state.scores);
        return true;
    }
    canSubmit() {
        return (this.state.phase === 'scoring' &&
            METRICS.every((m) => this.state.scores[m] !== null));
    }
    async submit() {
        if (!this.canSubmit() || this.state.current === null)
            return;
        const answerId = this.state.current.answer_id;
        try {
            await this.api.postScores({
                annotator_id: this.annotatorId,
                answer_id: answerId,
                coverage: this.state.scores.coverage,
                relatedness: this.state.scores.relatedness,
                quality: this.state.scores.quality,
            }, this.token);
        }
        catch (err) {
            if (err instanceof ApiError && err.status === 409) {
                // someone (perhaps another tab) already scored this answer; the
                // server is the source of truth, so surface it and move on
                this.drafts.clear(this.annotatorId, answerId);
                await this.loadNext();
                this.state.error = `Already recorded: ${err.message}`;
                return;
            }
            this.state.error = `${describe(err)} Your scores are saved on this device; retry when ready.`;
            return;
        }
        this.drafts.clear(this.annotatorId, answerId);
        await this.loadNext();
    }
}
function describe(err) {
    if (err instanceof ApiError)
        return err.message;
    return 'Could not reach the server.';
}
function likertRow(metric, label, selected) {
    const buttons = LIKERT.map((value) => `
      <label class="likert-option">
        <input type="radio" name="${metric}" data-metric="${metric}" data-value="${value}"
               ${selected === value ? 'checked' : ''}>
        <span>${value}</span>
      </label>`).join('');
    return `
    <fieldset class="likert" data-metric-row="${metric}">
      <legend>${label}</legend>
      ${buttons}
    </fieldset>`;
}
export function renderAnnotate(state) {
    if (state.phase === 'loading') {
        return '<p class="status">Loading the next answer…</p>';
    }
    if (state.phase === 'error') {
        return `
      <div class="banner banner-error">${escapeHtml(state.error ?? 'Something went wrong.')}</div>
      <button id="retry-btn">Retry</button>`;
    }
    if (state.phase === 'done' && state.done) {
        return `
      <div class="done-card">
        <h2>All answers reviewed</h2>
        <p>You completed ${state.done.completed} of ${state.done.total} questions. Thank you.</p>
      </div>`;
    }
    const task = state.task;
    const current = state.current;
    if (!task || !current)
        return '<p class="status">Nothing to review.</p>';
    const { completed, total } = task.progress;
    const remaining = task.answers.length;
    const error = state.error
        ? `<div class="banner banner-error">${escapeHtml(state.error)}</div>`
        : '';
    return `
    ${error}
    <div class="progress">
      <progress max="${total}" value="${completed}"></progress>
      <span>${completed} of ${total} questions done; ${remaining} answer${remaining === 1 ? '' : 's'} left on this one</span>
    </div>
    <section class="question-card">
      <h2>Question</h2>
      <p>${escapeHtml(task.question)}</p>
      <h3>Reference answer</h3>
      <p class="reference">${escapeHtml(task.reference_answer)}</p>
    </section>
    <section class="answer-card" data-answer-id="${escapeHtml(current.answer_id)}">
      <h2>Candidate answer</h2>
      <p>${escapeHtml(current.answer)}</p>
    </section>
    <form class="scores" onsubmit="return false">
      ${likertRow('coverage', 'Coverage: how much of the reference is covered', state.scores.coverage)}
      ${likertRow('relatedness', 'Relatedness: does it address the question', state.scores.relatedness)}
      ${likertRow('quality', 'Quality: overall writing and usefulness', state.scores.quality)}
      <button id="submit-btn" ${METRICS.every((m) => state.scores[m] !== null) ? '' : 'disabled'}>
        Submit scores
      </button>
    </form>`;
}
