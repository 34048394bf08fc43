/**
 * Draft verdicts persisted per (reviewer, question) so a reload
 * mid-question restores the selections.
 */

import { Dimension, Verdict, DIMENSIONS, VERDICTS } from './schema.js'

export type Draft = Partial<Record<Dimension, Verdict>>

export class DraftStore {
  constructor(
    private readonly token: string,
    private readonly storage: Storage = window.localStorage,
  ) {}

  private key(questionId: string): string {
    return `review-draft:${this.token}:${questionId}`
  }

  load(questionId: string): Draft {
    const raw = this.storage.getItem(this.key(questionId))
    if (!raw) return {}
    try {
      const parsed = JSON.parse(raw) as Record<string, unknown>
      const draft: Draft = {}
      for (const dim of DIMENSIONS) {
        const value = parsed[dim]
        if (typeof value === 'string' && (VERDICTS as readonly string[]).includes(value)) {
          draft[dim] = value as Verdict
        }
      }
      return draft
    } catch {
      return {}
    }
  }

  save(questionId: string, draft: Draft): void {
    this.storage.setItem(this.key(questionId), JSON.stringify(draft))
  }

  clear(questionId: string): void {
    this.storage.removeItem(this.key(questionId))
  }
}
