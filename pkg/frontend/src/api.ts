// Typed client for the two endpoint groups this UI is allowed to touch:
// annotation tasks/scores and the session leaderboard. All server state
// changes go through postScores; nothing else mutates anything.

export interface CandidateAnswer {
  answer_id: string;
  answer: string;
}

export interface AnnotationTask {
  done: false;
  question_id: string;
  question: string;
  reference_answer: string;
  answers: CandidateAnswer[];
  progress: { completed: number; total: number };
}

export interface AnnotationDone {
  done: true;
  completed: number;
  total: number;
}

export type TaskResponse = AnnotationTask | AnnotationDone;

export interface ScorePayload {
  annotator_id: string;
  answer_id: string;
  coverage: number;
  relatedness: number;
  quality: number;
}

export interface LeaderboardEntry {
  rank: number | null;
  team_id: string;
  team_name: string;
  correctness: number;
  faithfulness: number;
}

export interface LeaderboardResponse {
  session_id: string;
  entries: LeaderboardEntry[];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function fail(response: Response): Promise<never> {
  let detail = response.statusText || `HTTP ${response.status}`;
  try {
    const body = (await response.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    // non-JSON error body, keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(
    private fetchFn: FetchLike,
    private baseUrl = '',
  ) {}

  private headers(token: string): Record<string, string> {
    return { Authorization: `Bearer ${token}`, 'Content-Type': 'application/json' };
  }

  async fetchTask(annotatorId: string, token: string): Promise<TaskResponse> {
    const url = `${this.baseUrl}/annotation/tasks?annotator=${encodeURIComponent(annotatorId)}`;
    const response = await this.fetchFn(url, { headers: this.headers(token) });
    if (!response.ok) await fail(response);
    return (await response.json()) as TaskResponse;
  }

  async postScores(payload: ScorePayload, token: string): Promise<void> {
    const response = await this.fetchFn(`${this.baseUrl}/annotation/scores`, {
      method: 'POST',
      headers: this.headers(token),
      body: JSON.stringify(payload),
    });
    if (!response.ok) await fail(response);
    await response.json();
  }

  async fetchLeaderboard(sessionId: string): Promise<LeaderboardResponse> {
    const url = `${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/leaderboard`;
    const response = await this.fetchFn(url);
    if (!response.ok) await fail(response);
    return (await response.json()) as LeaderboardResponse;
  }
}
