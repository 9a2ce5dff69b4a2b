// In-memory stand-in for the orchestrator's annotation and leaderboard
// endpoints, plus the rank-aggregation oracle the round-trip test compares
// against. The server keeps the answer -> team mapping private, exactly like
// the real one, and records everything it sends or receives so tests can
// audit the traffic.

import type { FetchLike, LeaderboardResponse } from '../src/api.js';

export interface FixtureQuestion {
  id: string;
  question: string;
  reference: string;
}

export interface FixtureAnswer {
  questionId: string;
  teamId: string;
  answer: string;
}

export interface CsvRow {
  question_id: string;
  team_id: string;
  annotator_id: string;
  coverage: number;
  relatedness: number;
  quality: number;
}

// FNV-1a with an avalanche finalizer: cheap deterministic stand-in for the
// server's keyed shuffle and opaque ids
export function hashHex(text: string): string {
  let h = 2166136261;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  h ^= h >>> 16;
  h = Math.imul(h, 0x85ebca6b);
  h ^= h >>> 13;
  h = Math.imul(h, 0xc2b2ae35);
  h ^= h >>> 16;
  return (h >>> 0).toString(16).padStart(8, '0');
}

interface StoredAnswer {
  answerId: string;
  questionId: string;
  teamId: string;
  answer: string;
}

export class FakeServer {
  rows: CsvRow[] = [];
  requests: { url: string; body: string | null }[] = [];
  responses: unknown[] = [];
  failNext = false;
  private answers: StoredAnswer[] = [];

  constructor(
    private questions: FixtureQuestion[],
    answers: FixtureAnswer[],
    private leaderboards: Record<string, LeaderboardResponse> = {},
  ) {
    for (const a of answers) {
      this.answers.push({
        answerId: hashHex(`${a.questionId}\x1f${a.teamId}`),
        questionId: a.questionId,
        teamId: a.teamId,
        answer: a.answer,
      });
    }
  }

  seed(row: CsvRow): void {
    this.rows.push(row);
  }

  fetch: FetchLike = async (url, init) => {
    this.requests.push({ url, body: (init?.body as string) ?? null });
    if (this.failNext) {
      this.failNext = false;
      throw new TypeError('fetch failed');
    }
    const reply = (status: number, body: unknown): Response => {
      this.responses.push(body);
      return new Response(JSON.stringify(body), {
        status,
        headers: { 'Content-Type': 'application/json' },
      });
    };

    const tasks = url.match(/\/annotation\/tasks\?annotator=([^&]+)$/);
    if (tasks) {
      return reply(200, this.nextTask(decodeURIComponent(tasks[1])));
    }
    if (url.endsWith('/annotation/scores')) {
      const payload = JSON.parse((init?.body as string) ?? '{}') as {
        annotator_id: string;
        answer_id: string;
        coverage: number;
        relatedness: number;
        quality: number;
      };
      const found = this.answers.find((a) => a.answerId === payload.answer_id);
      if (!found) {
        return reply(404, { detail: `no answer ${payload.answer_id} awaiting annotation` });
      }
      for (const metric of ['coverage', 'relatedness', 'quality'] as const) {
        if (![0, 1, 2].includes(payload[metric])) {
          return reply(400, { detail: `${metric} must be 0, 1 or 2` });
        }
      }
      const duplicate = this.rows.some(
        (r) =>
          r.question_id === found.questionId &&
          r.team_id === found.teamId &&
          r.annotator_id === payload.annotator_id,
      );
      if (duplicate) {
        return reply(409, {
          detail: `duplicate annotation for ${found.questionId} by ${payload.annotator_id}`,
        });
      }
      this.rows.push({
        question_id: found.questionId,
        team_id: found.teamId,
        annotator_id: payload.annotator_id,
        coverage: payload.coverage,
        relatedness: payload.relatedness,
        quality: payload.quality,
      });
      return reply(200, {
        recorded: true,
        question_id: found.questionId,
        annotator_id: payload.annotator_id,
      });
    }
    const board = url.match(/\/sessions\/([^/]+)\/leaderboard$/);
    if (board) {
      const sessionId = decodeURIComponent(board[1]);
      const payload = this.leaderboards[sessionId];
      if (!payload) return reply(404, { detail: `no session ${sessionId}` });
      return reply(200, payload);
    }
    return reply(404, { detail: `no route ${url}` });
  };

  private nextTask(annotatorId: string): unknown {
    const scored = new Set(
      this.rows
        .filter((r) => r.annotator_id === annotatorId)
        .map((r) => `${r.question_id}\x1f${r.team_id}`),
    );
    const total = this.questions.length;
    let completed = 0;
    let task: unknown = null;
    for (const q of [...this.questions].sort((a, b) => a.id.localeCompare(b.id))) {
      const unscored = this.answers.filter(
        (a) => a.questionId === q.id && !scored.has(`${a.questionId}\x1f${a.teamId}`),
      );
      if (unscored.length === 0) {
        completed += 1;
        continue;
      }
      if (task === null) {
        unscored.sort((a, b) =>
          hashHex(`${annotatorId}\x1f${a.answerId}`).localeCompare(
            hashHex(`${annotatorId}\x1f${b.answerId}`),
          ),
        );
        task = {
          done: false,
          question_id: q.id,
          question: q.question,
          reference_answer: q.reference,
          answers: unscored.map((a) => ({ answer_id: a.answerId, answer: a.answer })),
        };
      }
    }
    if (task === null) return { done: true, completed, total };
    return { ...(task as object), progress: { completed, total } };
  }
}

// ---- CSV + rank aggregation oracle ----

export function toCsv(rows: CsvRow[]): string {
  const header = 'question_id,team_id,annotator_id,coverage,relatedness,quality';
  const lines = rows.map(
    (r) =>
      `${r.question_id},${r.team_id},${r.annotator_id},${r.coverage},${r.relatedness},${r.quality}`,
  );
  return [header, ...lines].join('\n') + '\n';
}

export function parseCsv(text: string): CsvRow[] {
  const lines = text.trim().split('\n');
  const header = lines[0].split(',');
  return lines.slice(1).map((line) => {
    const fields = line.split(',');
    const get = (name: string) => fields[header.indexOf(name)];
    return {
      question_id: get('question_id'),
      team_id: get('team_id'),
      annotator_id: get('annotator_id'),
      coverage: Number(get('coverage')),
      relatedness: Number(get('relatedness')),
      quality: Number(get('quality')),
    };
  });
}

const METRICS = ['coverage', 'relatedness', 'quality'] as const;

function bordaPoints(scores: number[]): number[] {
  const order = scores
    .map((score, index) => ({ score, index }))
    .sort((a, b) => b.score - a.score);
  const points = new Array<number>(scores.length).fill(0);
  let i = 0;
  while (i < order.length) {
    let j = i;
    while (j + 1 < order.length && order[j + 1].score === order[i].score) j++;
    let sum = 0;
    for (let p = i; p <= j; p++) sum += order.length - 1 - p;
    const share = sum / (j - i + 1);
    for (let p = i; p <= j; p++) points[order[p].index] = share;
    i = j + 1;
  }
  return points;
}

export interface TeamReport {
  borda: number;
  coverage_mean: number;
  relatedness_mean: number;
  quality_mean: number;
}

// Average annotators per (question, team), rank teams per question per
// metric with tied runs sharing mean points, then average over questions.
export function bordaReport(rows: CsvRow[]): Record<string, TeamReport> {
  const averaged = new Map<string, { count: number; sums: Record<string, number> }>();
  for (const row of rows) {
    const key = `${row.question_id}\x1f${row.team_id}`;
    const bucket = averaged.get(key) ?? {
      count: 0,
      sums: { coverage: 0, relatedness: 0, quality: 0 },
    };
    bucket.count += 1;
    for (const m of METRICS) bucket.sums[m] += row[m];
    averaged.set(key, bucket);
  }
  const questions = [...new Set(rows.map((r) => r.question_id))].sort();
  const teams = [...new Set(rows.map((r) => r.team_id))].sort();

  const bordaTotals = new Map(teams.map((t) => [t, 0]));
  const metricTotals = new Map(teams.map((t) => [t, { coverage: 0, relatedness: 0, quality: 0 }]));
  for (const q of questions) {
    for (const m of METRICS) {
      const scores = teams.map((t) => {
        const bucket = averaged.get(`${q}\x1f${t}`);
        if (!bucket) throw new Error(`team ${t} missing on ${q}`);
        return bucket.sums[m] / bucket.count;
      });
      const points = bordaPoints(scores);
      teams.forEach((t, i) => {
        bordaTotals.set(t, (bordaTotals.get(t) ?? 0) + points[i]);
        metricTotals.get(t)![m] += scores[i];
      });
    }
  }
  const report: Record<string, TeamReport> = {};
  for (const t of teams) {
    const totals = metricTotals.get(t)!;
    report[t] = {
      borda: (bordaTotals.get(t) ?? 0) / questions.length,
      coverage_mean: totals.coverage / questions.length,
      relatedness_mean: totals.relatedness / questions.length,
      quality_mean: totals.quality / questions.length,
    };
  }
  return report;
}

// ---- shared fixture: 3 teams, 5 questions ----

export const HIDDEN_TEAMS = ['team-red', 'team-green', 'team-blue'];

export interface Fixture {
  questions: FixtureQuestion[];
  answers: FixtureAnswer[];
  // the annotator's intended judgment, keyed by the answer TEXT: all the UI
  // ever shows is the text, so the test "reads" it like a human would
  judgments: Map<string, { coverage: number; relatedness: number; quality: number }>;
  csvRows: CsvRow[];
}

export function threeTeamFixture(annotatorId: string): Fixture {
  const questions: FixtureQuestion[] = [];
  const answers: FixtureAnswer[] = [];
  const judgments = new Map<string, { coverage: number; relatedness: number; quality: number }>();
  const csvRows: CsvRow[] = [];
  for (let q = 0; q < 5; q++) {
    const id = `q${q}`;
    questions.push({
      id,
      question: `Question number ${q}?`,
      reference: `Reference answer ${q}.`,
    });
    HIDDEN_TEAMS.forEach((teamId, t) => {
      const text = `Candidate ${q}-${t}: an answer to question ${q}.`;
      const scores = {
        coverage: (q + t) % 3,
        relatedness: (q * 2 + t) % 3,
        quality: (q + t * 2) % 3,
      };
      answers.push({ questionId: id, teamId, answer: text });
      judgments.set(text, scores);
      csvRows.push({ question_id: id, team_id: teamId, annotator_id: annotatorId, ...scores });
    });
  }
  return { questions, answers, judgments, csvRows };
}
