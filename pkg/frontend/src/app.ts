/**
 * Session controller: walks the reviewer through the server-assigned
 * pending list, one blinded pair at a time.
 *
 * Verdict selections persist as local drafts immediately, so a reload
 * mid-question restores them; drafts clear only after the server
 * acknowledges the submission.
 */

import { ApiError, ReviewApiClient } from './api.js'
import { Draft, DraftStore } from './drafts.js'
import { Dimension, SchemaError, Verdict, isCompleteDraft } from './schema.js'
import {
  renderDone,
  renderError,
  renderPair,
  renderProgress,
  setSubmitEnabled,
  showFormMessage,
} from './view.js'

export class ReviewApp {
  private currentQuestion: string | null = null
  private draft: Draft = {}
  private submitting = false

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ReviewApiClient,
    private readonly drafts: DraftStore,
  ) {}

  async start(): Promise<void> {
    try {
      const session = await this.api.session()
      renderProgress(this.root, session.progress)
      const next = session.pending[0]
      if (next === undefined) {
        renderDone(this.root, session.progress)
        return
      }
      await this.showQuestion(next)
    } catch (err) {
      this.showFailure(err, () => void this.start())
    }
  }

  private async showQuestion(questionId: string): Promise<void> {
    try {
      const payload = await this.api.pair(questionId)
      this.currentQuestion = questionId
      this.draft = this.drafts.load(questionId)
      renderPair(this.root, payload, this.draft, {
        onVerdict: (dimension, verdict) => this.onVerdict(dimension, verdict),
        onSubmit: () => void this.onSubmit(),
      })
      setSubmitEnabled(this.root, isCompleteDraft(this.draft))
    } catch (err) {
      this.showFailure(err, () => void this.showQuestion(questionId))
    }
  }

  private onVerdict(dimension: Dimension, verdict: Verdict): void {
    if (this.currentQuestion === null) return
    this.draft[dimension] = verdict
    this.drafts.save(this.currentQuestion, this.draft)
    setSubmitEnabled(this.root, isCompleteDraft(this.draft))
  }

  private async onSubmit(): Promise<void> {
    if (this.currentQuestion === null || this.submitting) return
    if (!isCompleteDraft(this.draft)) return
    this.submitting = true
    setSubmitEnabled(this.root, false)
    try {
      const ack = await this.api.submit(
        this.currentQuestion,
        this.draft as Record<Dimension, Verdict>,
      )
      this.drafts.clear(this.currentQuestion)
      this.currentQuestion = null
      this.draft = {}
      renderProgress(this.root, ack.progress)
      await this.advance()
    } catch (err) {
      // validation errors surface inline with the draft intact
      if (err instanceof ApiError && !err.transient) {
        showFormMessage(this.root, err.message)
        setSubmitEnabled(this.root, true)
      } else {
        showFormMessage(this.root, 'Connection lost; your selections are saved. Try again.')
        setSubmitEnabled(this.root, true)
      }
    } finally {
      this.submitting = false
    }
  }

  private async advance(): Promise<void> {
    const session = await this.api.session()
    renderProgress(this.root, session.progress)
    const next = session.pending[0]
    if (next === undefined) {
      renderDone(this.root, session.progress)
      return
    }
    await this.showQuestion(next)
  }

  private showFailure(err: unknown, retry: () => void): void {
    if (err instanceof SchemaError) {
      renderError(this.root, `Payload rejected: ${err.message}`)
      return
    }
    const message = err instanceof Error ? err.message : String(err)
    renderError(this.root, message, retry)
  }
}
