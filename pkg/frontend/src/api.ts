/**
 * Typed client for the review-service HTTP API.
 *
 * Submissions retry on transport failure; the server treats a repeated
 * (reviewer, question) submission as an overwrite, so retries are
 * idempotent by construction.
 */

import {
  BlindedPairPayload,
  Dimension,
  JudgmentAck,
  Progress,
  SessionPayload,
  Verdict,
  parseBlindedPair,
  parseJudgmentAck,
  parseProgress,
  parseSession,
} from './schema.js'

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number | null = null,
    readonly transient = false,
  ) {
    super(message)
    this.name = 'ApiError'
  }
}

const SUBMIT_RETRIES = 2

export class ReviewApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init: RequestInit = {}): Promise<unknown> {
    let response: Response
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, {
        ...init,
        headers: {
          'X-Review-Token': this.token,
          'Content-Type': 'application/json',
          ...(init.headers ?? {}),
        },
      })
    } catch (err) {
      throw new ApiError(`cannot reach the review service: ${String(err)}`, null, true)
    }
    const body = await response.text()
    if (!response.ok) {
      let detail = body
      try {
        const parsed = JSON.parse(body) as { detail?: string }
        if (typeof parsed.detail === 'string') detail = parsed.detail
      } catch {
        // non-JSON error body; keep raw text
      }
      throw new ApiError(detail || `HTTP ${response.status}`, response.status)
    }
    try {
      return JSON.parse(body) as unknown
    } catch {
      throw new ApiError('service returned a non-JSON payload', response.status)
    }
  }

  async session(): Promise<SessionPayload> {
    return parseSession(await this.request('/api/session'))
  }

  async pair(questionId: string): Promise<BlindedPairPayload> {
    return parseBlindedPair(await this.request(`/api/pairs/${encodeURIComponent(questionId)}`))
  }

  async progress(): Promise<Progress> {
    return parseProgress(await this.request('/api/progress'))
  }

  async submit(questionId: string, verdicts: Record<Dimension, Verdict>): Promise<JudgmentAck> {
    const body = JSON.stringify({ question_id: questionId, verdicts })
    let lastError: ApiError | null = null
    for (let attempt = 0; attempt <= SUBMIT_RETRIES; attempt++) {
      try {
        const raw = await this.request('/api/judgments', { method: 'POST', body })
        return parseJudgmentAck(raw)
      } catch (err) {
        if (err instanceof ApiError && err.transient) {
          lastError = err
          continue
        }
        throw err
      }
    }
    throw lastError ?? new ApiError('submission failed', null, true)
  }
}
