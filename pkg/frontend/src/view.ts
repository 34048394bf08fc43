/**
 * DOM construction for the review screens.
 *
 * Answer text is untrusted model output: it is rendered exclusively
 * through textContent (one <p> per paragraph), never through innerHTML,
 * so nothing in an answer can execute or inject markup.
 */

import { BlindedPairPayload, DIMENSIONS, Dimension, Progress, Verdict } from './schema.js'
import { Draft } from './drafts.js'

export const CRITERIA: Record<Dimension, string> = {
  Factuality:
    'How well the answer agrees with established medical facts and gives accurate, checkable explanations.',
  Completeness:
    'How fully the answer covers the clinical situation in the question, including other relevant considerations.',
  Readability:
    'How easy the answer is to understand for the person asking, in its language and structure.',
  Relevance:
    'How directly the answer addresses the medical question asked, covering the pertinent information.',
}

const VERDICT_LABELS: [Verdict, string][] = [
  ['slot_a', 'Answer A better'],
  ['tie', 'Tie'],
  ['slot_b', 'Answer B better'],
]

export interface PairViewCallbacks {
  onVerdict: (dimension: Dimension, verdict: Verdict) => void
  onSubmit: () => void
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag)
  if (className) node.className = className
  if (text !== undefined) node.textContent = text
  return node
}

function answerColumn(label: string, text: string): HTMLElement {
  const column = el('section', 'answer-column')
  column.appendChild(el('h3', 'answer-label', label))
  const body = el('div', 'answer-body')
  for (const paragraph of text.split(/\n{2,}|\n/)) {
    if (paragraph.trim()) body.appendChild(el('p', undefined, paragraph))
  }
  column.appendChild(body)
  return column
}

export function renderProgress(container: HTMLElement, progress: Progress): void {
  let bar = container.querySelector<HTMLElement>('.progress')
  if (!bar) {
    bar = el('div', 'progress')
    container.prepend(bar)
  }
  bar.textContent = `Judged ${progress.judged} of ${progress.total} questions`
}

export function renderPair(
  container: HTMLElement,
  payload: BlindedPairPayload,
  draft: Draft,
  callbacks: PairViewCallbacks,
): void {
  container.querySelector('.pair')?.remove()
  container.querySelector('.error-view')?.remove()
  container.querySelector('.done-view')?.remove()

  const pair = el('div', 'pair')
  pair.dataset.questionId = payload.question_id

  const question = el('section', 'question')
  question.appendChild(el('h2', undefined, 'Question'))
  question.appendChild(el('p', undefined, payload.question_text))
  pair.appendChild(question)

  const answers = el('div', 'answers')
  answers.appendChild(answerColumn('Answer A', payload.slot_a_text))
  answers.appendChild(answerColumn('Answer B', payload.slot_b_text))
  pair.appendChild(answers)

  const form = el('form', 'verdicts')
  form.addEventListener('submit', (event) => event.preventDefault())
  for (const dimension of DIMENSIONS) {
    const row = el('fieldset', 'dimension-row')
    row.dataset.dimension = dimension
    const legend = el('legend', 'dimension-name', dimension)
    legend.title = CRITERIA[dimension]
    row.appendChild(legend)
    for (const [verdict, label] of VERDICT_LABELS) {
      const wrap = el('label', 'verdict-option')
      const input = el('input')
      input.type = 'radio'
      input.name = `verdict-${dimension}`
      input.value = verdict
      input.checked = draft[dimension] === verdict
      input.addEventListener('change', () => callbacks.onVerdict(dimension, verdict))
      wrap.appendChild(input)
      wrap.appendChild(el('span', undefined, label))
      row.appendChild(wrap)
    }
    form.appendChild(row)
  }

  const submit = el('button', 'submit-judgment', 'Submit verdicts')
  submit.type = 'submit'
  submit.disabled = true
  submit.addEventListener('click', () => {
    if (!submit.disabled) callbacks.onSubmit()
  })
  form.appendChild(submit)
  const message = el('p', 'form-message')
  message.setAttribute('role', 'alert')
  form.appendChild(message)

  pair.appendChild(form)
  container.appendChild(pair)
}

export function setSubmitEnabled(container: HTMLElement, enabled: boolean): void {
  const submit = container.querySelector<HTMLButtonElement>('.submit-judgment')
  if (submit) submit.disabled = !enabled
}

export function showFormMessage(container: HTMLElement, text: string): void {
  const message = container.querySelector<HTMLElement>('.form-message')
  if (message) message.textContent = text
}

export function renderError(container: HTMLElement, text: string, onRetry?: () => void): void {
  container.querySelector('.pair')?.remove()
  container.querySelector('.error-view')?.remove()
  const view = el('div', 'error-view')
  view.appendChild(el('p', undefined, text))
  if (onRetry) {
    const retry = el('button', 'retry', 'Retry')
    retry.addEventListener('click', onRetry)
    view.appendChild(retry)
  }
  container.appendChild(view)
}

export function renderDone(container: HTMLElement, progress: Progress): void {
  container.querySelector('.pair')?.remove()
  container.querySelector('.error-view')?.remove()
  const view = el('div', 'done-view')
  view.appendChild(
    el('p', undefined, `All ${progress.total} questions reviewed. Thank you.`),
  )
  container.appendChild(view)
}
