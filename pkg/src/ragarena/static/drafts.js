// Draft scores survive reloads and network trouble: every radio click is
// written to browser storage keyed by (annotator, answer) and only a
// confirmed submission clears the key.
export const EMPTY_DRAFT = { coverage: null, relatedness: null, quality: null };
function key(annotatorId, answerId) {
    return `ragarena:draft:${annotatorId}:${answerId}`;
}
export class DraftStore {
    constructor(storage) {
        this.storage = storage;
    }
    load(annotatorId, answerId) {
        const raw = this.storage.getItem(key(annotatorId, answerId));
        if (raw === null)
            return { ...EMPTY_DRAFT };
        try {
            const parsed = JSON.parse(raw);
            return {
                coverage: parsed.coverage ?? null,
                relatedness: parsed.relatedness ?? null,
                quality: parsed.quality ?? null,
            };
        }
        catch {
            return { ...EMPTY_DRAFT };
        }
    }
    save(annotatorId, answerId, draft) {
        this.storage.setItem(key(annotatorId, answerId), JSON.stringify(draft));
    }
    clear(annotatorId, answerId) {
        this.storage.removeItem(key(annotatorId, answerId));
    }
}
