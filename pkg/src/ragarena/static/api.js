// Typed client for the two endpoint groups this UI is allowed to touch:
// annotation tasks/scores and the session leaderboard. All server state
// changes go through postScores; nothing else mutates anything.
export class ApiError extends Error {
    constructor(status, detail) {
        super(detail);
        this.status = status;
    }
}
async function fail(response) {
    let detail = response.statusText || `HTTP ${response.status}`;
    try {
        const body = (await response.json());
        if (body.detail)
            detail = body.detail;
    }
    catch {
        // non-JSON error body, keep the status text
    }
    throw new ApiError(response.status, detail);
}
export class ApiClient {
    constructor(fetchFn, baseUrl = '') {
        this.fetchFn = fetchFn;
        this.baseUrl = baseUrl;
    }
    headers(token) {
        return { Authorization: `Bearer ${token}`, 'Content-Type': 'application/json' };
    }
    async fetchTask(annotatorId, token) {
        const url = `${this.baseUrl}/annotation/tasks?annotator=${encodeURIComponent(annotatorId)}`;
        const response = await this.fetchFn(url, { headers: this.headers(token) });
        if (!response.ok)
            await fail(response);
        return (await response.json());
    }
    async postScores(payload, token) {
        const response = await this.fetchFn(`${this.baseUrl}/annotation/scores`, {
            method: 'POST',
            headers: this.headers(token),
            body: JSON.stringify(payload),
        });
        if (!response.ok)
            await fail(response);
        await response.json();
    }
    async fetchLeaderboard(sessionId) {
        const url = `${this.baseUrl}/sessions/${encodeURIComponent(sessionId)}/leaderboard`;
        const response = await this.fetchFn(url);
        if (!response.ok)
            await fail(response);
        return (await response.json());
    }
}
