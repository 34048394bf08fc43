/**
 * Strict runtime validation of review-service payloads.
 *
 * Every parser rejects unknown fields, not just missing ones: a pair
 * payload carrying anything beyond the four blinded fields means the
 * blinding contract is broken, and the UI must refuse to render rather
 * than leak it. This is the client-side blinding assertion.
 */

export const DIMENSIONS = ['Factuality', 'Completeness', 'Readability', 'Relevance'] as const
export type Dimension = (typeof DIMENSIONS)[number]

export const VERDICTS = ['slot_a', 'tie', 'slot_b'] as const
export type Verdict = (typeof VERDICTS)[number]

export interface Progress {
  judged: number
  total: number
}

export interface SessionPayload {
  pending: string[]
  progress: Progress
}

export interface BlindedPairPayload {
  question_id: string
  question_text: string
  slot_a_text: string
  slot_b_text: string
}

export interface JudgmentAck {
  status: string
  replaced: boolean
  progress: Progress
}

export class SchemaError extends Error {
  constructor(message: string) {
    super(message)
    this.name = 'SchemaError'
  }
}

function asRecord(raw: unknown, what: string): Record<string, unknown> {
  if (typeof raw !== 'object' || raw === null || Array.isArray(raw)) {
    throw new SchemaError(`${what}: expected an object`)
  }
  return raw as Record<string, unknown>
}

function requireKeys(obj: Record<string, unknown>, keys: readonly string[], what: string): void {
  for (const key of keys) {
    if (!(key in obj)) throw new SchemaError(`${what}: missing field "${key}"`)
  }
  for (const key of Object.keys(obj)) {
    if (!keys.includes(key)) {
      throw new SchemaError(`${what}: unexpected field "${key}" (blinding assertion)`)
    }
  }
}

function str(obj: Record<string, unknown>, key: string, what: string): string {
  const value = obj[key]
  if (typeof value !== 'string') throw new SchemaError(`${what}: "${key}" must be a string`)
  return value
}

function num(obj: Record<string, unknown>, key: string, what: string): number {
  const value = obj[key]
  if (typeof value !== 'number' || !Number.isFinite(value)) {
    throw new SchemaError(`${what}: "${key}" must be a number`)
  }
  return value
}

export function parseProgress(raw: unknown): Progress {
  const obj = asRecord(raw, 'progress')
  requireKeys(obj, ['judged', 'total'], 'progress')
  return { judged: num(obj, 'judged', 'progress'), total: num(obj, 'total', 'progress') }
}

export function parseSession(raw: unknown): SessionPayload {
  const obj = asRecord(raw, 'session')
  requireKeys(obj, ['pending', 'progress'], 'session')
  const pending = obj['pending']
  if (!Array.isArray(pending) || pending.some((v) => typeof v !== 'string')) {
    throw new SchemaError('session: "pending" must be an array of strings')
  }
  return { pending: pending as string[], progress: parseProgress(obj['progress']) }
}

export function parseBlindedPair(raw: unknown): BlindedPairPayload {
  const obj = asRecord(raw, 'pair')
  requireKeys(obj, ['question_id', 'question_text', 'slot_a_text', 'slot_b_text'], 'pair')
  return {
    question_id: str(obj, 'question_id', 'pair'),
    question_text: str(obj, 'question_text', 'pair'),
    slot_a_text: str(obj, 'slot_a_text', 'pair'),
    slot_b_text: str(obj, 'slot_b_text', 'pair'),
  }
}

export function parseJudgmentAck(raw: unknown): JudgmentAck {
  const obj = asRecord(raw, 'ack')
  requireKeys(obj, ['status', 'replaced', 'progress'], 'ack')
  if (typeof obj['replaced'] !== 'boolean') throw new SchemaError('ack: "replaced" must be boolean')
  return {
    status: str(obj, 'status', 'ack'),
    replaced: obj['replaced'],
    progress: parseProgress(obj['progress']),
  }
}

export function isCompleteDraft(draft: Partial<Record<Dimension, Verdict>>): boolean {
  return DIMENSIONS.every((dim) => draft[dim] !== undefined)
}
