import { readFileSync } from 'node:fs'
import { dirname, join } from 'node:path'
import { fileURLToPath } from 'node:url'

import { describe, expect, it } from 'vitest'

import { CpdClient } from '../src/index.js'

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), '..', 'fixtures')
const TOL = 1e-12

function loadFixture(name: string): any {
  return JSON.parse(readFileSync(join(FIXTURES, name), 'utf8'))
}

/** Compare a wire value against a recorded one: numbers to TOL, rest exact. */
function expectClose(actual: unknown, expected: unknown, path: string): void {
  if (typeof expected === 'number' && typeof actual === 'number') {
    expect(Math.abs(actual - expected), `${path}: ${actual} vs ${expected}`).toBeLessThanOrEqual(
      TOL * Math.max(1, Math.abs(expected)),
    )
    return
  }
  if (Array.isArray(expected)) {
    expect(Array.isArray(actual), path).toBe(true)
    expect((actual as unknown[]).length, path).toBe(expected.length)
    expected.forEach((item, i) => expectClose((actual as unknown[])[i], item, `${path}[${i}]`))
    return
  }
  if (expected !== null && typeof expected === 'object') {
    expect(typeof actual, path).toBe('object')
    for (const key of Object.keys(expected)) {
      expectClose(
        (actual as Record<string, unknown>)[key],
        (expected as Record<string, unknown>)[key],
        `${path}.${key}`,
      )
    }
    return
  }
  expect(actual, path).toEqual(expected)
}

describe('stepwise CDF parity (acceptance criterion 1 recordings)', () => {
  const fixture = loadFixture('stepwise_cdf.json')
  const client = new CpdClient()

  it('reproduces every recorded cdf value through the wire', () => {
    const instances: any[] = fixture.instances
    expect(instances.length).toBeGreaterThanOrEqual(600)
    // one core round trip for all instances
    const requests = instances.map((inst) => ({
      op: 'cdf_batch',
      model: { residuals: inst.thresholds, n_calib: inst.thresholds.length },
      queries: inst.queries.map((y: number) => ({
        y_hat: 0.0,
        sigma_hat: 1.0,
        tau: inst.tau,
        y,
      })),
    }))
    const results = client.batch(requests)
    results.forEach((result, i) => {
      const values = result.values as number[]
      const expected = instances[i].expected as number[]
      expect(values.length).toBe(expected.length)
      values.forEach((v, j) => {
        expect(Math.abs(v - expected[j]), `instance ${i} query ${j}`).toBeLessThanOrEqual(TOL)
      })
    })
  })

  it('reproduces one instance through the typed cdfBatch call', () => {
    const inst = fixture.instances[0]
    const model = Object.freeze({
      residuals: inst.thresholds as number[],
      nCalib: inst.thresholds.length,
      featureDim: 1,
    })
    const values = client.cdfBatch(
      model,
      (inst.queries as number[]).map((y) => ({ yHat: 0, sigmaHat: 1, tau: inst.tau, y })),
    )
    values.forEach((v, j) => {
      expect(Math.abs(v - inst.expected[j])).toBeLessThanOrEqual(TOL)
    })
  })
})

describe('hand-example parity (acceptance criterion 8 recordings)', () => {
  const fixture = loadFixture('hand_examples.json')
  const client = new CpdClient()

  it('replays every recorded case within 1e-12', () => {
    const cases: any[] = fixture.cases
    expect(cases.length).toBeGreaterThan(20)
    const results = client.batch(cases.map((c) => ({ op: c.op, ...c.request })))
    results.forEach((result, i) => {
      expectClose(result, cases[i].expected, `${cases[i].op}#${i}`)
    })
  })
})

describe('typed API agrees with the recorded hand values', () => {
  const client = new CpdClient()

  it('fit -> calibrationScores -> cdf -> interval round trip', () => {
    const model = client.fit([1.0, 0.0, 2.0], [0.5, 0.2, 1.0], [1.0, 0.5, 2.0])
    expect(model.nCalib).toBe(3)
    expect(model.residuals[0]).toBeCloseTo(-0.4, 12)

    const scores = client.calibrationScores(model, 1.0, 1.0)
    expect(scores).toEqual([0.6, 1.5, 1.5])

    expect(client.cdf(model, 1.0, 1.0, 1.0, 0.5)).toBe(0.375)
    expect(client.cdf(model, 1.0, 1.0, 1.5, 0.5)).toBe(0.625)

    const unbounded = client.interval(model, 0.0, 1.0, 0.1)
    expect(unbounded.lower).toBe(-Infinity)
    expect(unbounded.upper).toBe(Infinity)
  })

  it('gaussian baseline and metrics entry points', () => {
    expect(client.gaussianFit([1, -1, 1, -1], [0, 0, 0, 0])).toBe(1.0)
    const iv = client.gaussianInterval(0.0, 1.0, 0.9)
    expect(iv.lower).toBeCloseTo(-1.644854, 6)
    expect(client.gaussianCdf(0, 1, 0)).toBe(0.5)
    expect(client.probit(0.5)).toBe(0.0)
    expect(client.auroc([0.9, 0.8, 0.3, 0.1], [1, 1, 0, 0])).toBe(1.0)
    const sharp = client.sharpness([
      [0, 2],
      [-Infinity, 1],
      [1, 2],
    ])
    expect(sharp).toEqual({ meanWidth: 1.5, excludedUnbounded: 1 })
  })

  it('evaluate produces a full report', () => {
    const n = 40
    const labels = Array.from({ length: n }, (_, i) => Math.sin(i * 0.37) + i * 0.01)
    const model = client.fit(
      labels.map((v) => v + 0.1),
      labels.map(() => 0.0).map((_, i) => Math.sin(i * 0.37) * 0.9),
      labels.map(() => 1.0),
    )
    const report = client.evaluate(labels, labels.map((v) => v * 0.9), labels.map(() => 1.0), {
      method: 'cpd',
      model,
      gridStep: 0.1,
      tau: { mode: 'fixed', value: 0.5 },
    })
    expect(report.methodName).toBe('cpd')
    expect(report.nTest).toBe(n)
    expect(report.ece).toBeGreaterThanOrEqual(0)
    expect(report.ece).toBeLessThanOrEqual(1)
    expect(report.sharpnessAt['0.9']).toBeGreaterThanOrEqual(0)
  })
})
