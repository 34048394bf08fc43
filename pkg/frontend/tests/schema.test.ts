import { describe, expect, it } from 'vitest'

import {
  SchemaError,
  isCompleteDraft,
  parseBlindedPair,
  parseJudgmentAck,
  parseSession,
} from '../src/schema.js'

const validPair = {
  question_id: 'q01',
  question_text: 'Is this safe?',
  slot_a_text: 'Answer one.',
  slot_b_text: 'Answer two.',
}

describe('parseBlindedPair', () => {
  it('accepts exactly the blinded fields', () => {
    expect(parseBlindedPair(validPair)).toEqual(validPair)
  })

  it('rejects any extra field as a blinding violation', () => {
    expect(() => parseBlindedPair({ ...validPair, model_name: 'leaky' })).toThrowError(
      /blinding assertion/,
    )
    expect(() => parseBlindedPair({ ...validPair, hidden_assignment: 'augmented' })).toThrowError(
      SchemaError,
    )
  })

  it('rejects missing or mistyped fields', () => {
    const { slot_b_text, ...partial } = validPair
    expect(() => parseBlindedPair(partial)).toThrowError(/slot_b_text/)
    expect(() => parseBlindedPair({ ...validPair, slot_a_text: 7 })).toThrowError(SchemaError)
    expect(() => parseBlindedPair('not an object')).toThrowError(SchemaError)
  })
})

describe('parseSession', () => {
  it('parses pending ids and progress', () => {
    const session = parseSession({ pending: ['q01'], progress: { judged: 1, total: 3 } })
    expect(session.pending).toEqual(['q01'])
    expect(session.progress.total).toBe(3)
  })

  it('rejects non-string pending entries and extra fields', () => {
    expect(() =>
      parseSession({ pending: [1], progress: { judged: 0, total: 1 } }),
    ).toThrowError(SchemaError)
    expect(() =>
      parseSession({ pending: [], progress: { judged: 0, total: 1 }, assignment: 'x' }),
    ).toThrowError(/assignment/)
  })
})

describe('parseJudgmentAck', () => {
  it('round-trips a valid ack', () => {
    const ack = parseJudgmentAck({
      status: 'stored',
      replaced: false,
      progress: { judged: 1, total: 3 },
    })
    expect(ack.replaced).toBe(false)
  })
})

describe('isCompleteDraft', () => {
  it('requires all four dimensions', () => {
    expect(isCompleteDraft({})).toBe(false)
    expect(isCompleteDraft({ Factuality: 'tie', Completeness: 'tie', Readability: 'tie' })).toBe(
      false,
    )
    expect(
      isCompleteDraft({
        Factuality: 'slot_a',
        Completeness: 'tie',
        Readability: 'slot_b',
        Relevance: 'tie',
      }),
    ).toBe(true)
  })
})
