// Leaderboard numbers come from the API already rounded to 6 decimals;
// render them at exactly that width so the table matches the API verbatim.
export function formatScore(value) {
    return value.toFixed(6);
}
export function formatRank(rank) {
    return rank === null ? '-' : String(rank);
}
export function formatClock(date) {
    return date.toISOString().replace('T', ' ').slice(0, 19) + ' UTC';
}
export function escapeHtml(text) {
    return text
        .replace(/&/g, '&amp;')
        .replace(/</g, '&lt;')
        .replace(/>/g, '&gt;')
        .replace(/"/g, '&quot;');
}
