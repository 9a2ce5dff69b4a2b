// Draft scores survive reloads and network trouble: every radio click is
// written to browser storage keyed by (annotator, answer) and only a
// confirmed submission clears the key.

export interface DraftScores {
  coverage: number | null;
  relatedness: number | null;
  quality: number | null;
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export const EMPTY_DRAFT: DraftScores = { coverage: null, relatedness: null, quality: null };

function key(annotatorId: string, answerId: string): string {
  return `ragarena:draft:${annotatorId}:${answerId}`;
}

export class DraftStore {
  constructor(private storage: StorageLike) {}

  load(annotatorId: string, answerId: string): DraftScores {
    const raw = this.storage.getItem(key(annotatorId, answerId));
    if (raw === null) return { ...EMPTY_DRAFT };
    try {
      const parsed = JSON.parse(raw) as Partial<DraftScores>;
      return {
        coverage: parsed.coverage ?? null,
        relatedness: parsed.relatedness ?? null,
        quality: parsed.quality ?? null,
      };
    } catch {
      return { ...EMPTY_DRAFT };
    }
  }

  save(annotatorId: string, answerId: string, draft: DraftScores): void {
    this.storage.setItem(key(annotatorId, answerId), JSON.stringify(draft));
  }

  clear(annotatorId: string, answerId: string): void {
    this.storage.removeItem(key(annotatorId, answerId));
  }
}
