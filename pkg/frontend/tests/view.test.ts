import { beforeEach, describe, expect, it, vi } from 'vitest'

import { renderDone, renderPair, renderProgress, setSubmitEnabled } from '../src/view.js'

const payload = {
  question_id: 'q01',
  question_text: 'Do these tablets contain gluten?',
  slot_a_text: 'First answer.\n\nSecond paragraph.',
  slot_b_text: 'Other answer with <script>alert(1)</script> inside.',
}

function noopCallbacks() {
  return { onVerdict: vi.fn(), onSubmit: vi.fn() }
}

describe('renderPair', () => {
  beforeEach(() => {
    document.body.innerHTML = '<div id="app"></div>'
  })

  function app(): HTMLElement {
    return document.getElementById('app')!
  }

  it('shows both slots, four selectors and a disabled submit', () => {
    renderPair(app(), payload, {}, noopCallbacks())
    const labels = [...document.querySelectorAll('.answer-label')].map((n) => n.textContent)
    expect(labels).toEqual(['Answer A', 'Answer B'])
    expect(document.querySelectorAll('.dimension-row')).toHaveLength(4)
    expect(document.querySelector<HTMLButtonElement>('.submit-judgment')!.disabled).toBe(true)
  })

  it('preserves paragraphs and never executes markup', () => {
    renderPair(app(), payload, {}, noopCallbacks())
    const columns = document.querySelectorAll('.answer-body')
    expect(columns[0]!.querySelectorAll('p')).toHaveLength(2)
    // the script tag is inert text, not an element
    expect(document.querySelector('script')).toBeNull()
    expect(columns[1]!.textContent).toContain('<script>')
  })

  it('shows criterion descriptions as tooltips', () => {
    renderPair(app(), payload, {}, noopCallbacks())
    const names = [...document.querySelectorAll<HTMLElement>('.dimension-name')]
    expect(names.map((n) => n.textContent)).toEqual([
      'Factuality',
      'Completeness',
      'Readability',
      'Relevance',
    ])
    for (const name of names) expect(name.title.length).toBeGreaterThan(20)
  })

  it('restores draft selections into the radios', () => {
    renderPair(app(), payload, { Factuality: 'slot_b' }, noopCallbacks())
    const checked = document.querySelector<HTMLInputElement>(
      'input[name="verdict-Factuality"]:checked',
    )
    expect(checked?.value).toBe('slot_b')
  })

  it('reports verdict selections and gates submit', () => {
    const callbacks = noopCallbacks()
    renderPair(app(), payload, {}, callbacks)
    const radio = document.querySelector<HTMLInputElement>(
      'input[name="verdict-Readability"][value="tie"]',
    )!
    radio.click()
    expect(callbacks.onVerdict).toHaveBeenCalledWith('Readability', 'tie')

    setSubmitEnabled(app(), true)
    document.querySelector<HTMLButtonElement>('.submit-judgment')!.click()
    expect(callbacks.onSubmit).toHaveBeenCalledOnce()
  })

  it('renders progress and done states', () => {
    renderProgress(app(), { judged: 2, total: 5 })
    expect(app().textContent).toContain('Judged 2 of 5')
    renderDone(app(), { judged: 5, total: 5 })
    expect(app().textContent).toContain('All 5 questions reviewed')
  })
})
