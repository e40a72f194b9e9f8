/** TypeScript bindings for the cpdkit conformal predictive distribution core.
 *
 * Every method marshals in-memory arrays over the core's JSON interface and
 * back; no math is re-implemented on this side. Model handles are plain
 * immutable records, safe to share between calls. Arrays are copied at the
 * boundary by construction (they cross a process pipe), and contract
 * violations surface as typed exceptions carrying the core's message.
 */

import {
  callCore,
  decodeReal,
  decodeRealArray,
  encodeReal,
  encodeRealArray,
  RunnerOptions,
  unwrapSubResponse,
  WireReal,
} from './wire.js'
import { ContractViolationError } from './errors.js'

export { ContractViolationError, DegenerateDataError, CoreProcessError } from './errors.js'
export type { RunnerOptions } from './wire.js'

/** Sorted normalized calibration residuals plus bookkeeping. */
export interface ConformalModel {
  readonly residuals: readonly number[]
  readonly nCalib: number
  readonly featureDim: number
}

/** Closed interval; endpoints may be -Infinity / +Infinity. */
export interface PredictionInterval {
  readonly lower: number
  readonly upper: number
  readonly confidence: number
}

export interface EvalReport {
  readonly methodName: string
  readonly ece: number
  readonly sharpnessAt: Readonly<Record<string, number>>
  readonly sharpnessExcluded: Readonly<Record<string, number>>
  readonly auroc: number
  readonly nTest: number
}

export type TauPolicy =
  | { readonly mode: 'fixed'; readonly value: number }
  | { readonly mode: 'seeded_random'; readonly seed: number }

export interface CdfQuery {
  readonly yHat: number
  readonly sigmaHat: number
  readonly y: number
  readonly tau: number
}

export interface EvaluateOptions {
  readonly method: 'cpd' | 'gaussian'
  readonly model?: ConformalModel
  readonly sigmaFixed?: number
  readonly gridStep?: number
  readonly levels?: readonly number[]
  readonly tau?: TauPolicy
  readonly sharpnessConfidences?: readonly number[]
}

function requireSameLength(arrays: Record<string, readonly unknown[]>): void {
  const lengths = Object.entries(arrays).map(([name, arr]) => `${name}=${arr.length}`)
  const sizes = new Set(Object.values(arrays).map((arr) => arr.length))
  if (sizes.size > 1) {
    throw new ContractViolationError(`array length mismatch: ${lengths.join(', ')}`)
  }
}

function modelToWire(model: ConformalModel): Record<string, unknown> {
  return {
    residuals: encodeRealArray(model.residuals),
    n_calib: model.nCalib,
    feature_dim: model.featureDim,
  }
}

function modelFromWire(raw: unknown): ConformalModel {
  const obj = raw as { residuals: WireReal[]; n_calib: number; feature_dim?: number }
  return Object.freeze({
    residuals: Object.freeze(decodeRealArray(obj.residuals, 'model.residuals')),
    nCalib: obj.n_calib,
    featureDim: obj.feature_dim ?? 1,
  })
}

function intervalFromWire(raw: unknown): PredictionInterval {
  const obj = raw as { lower: WireReal; upper: WireReal; confidence: number }
  return Object.freeze({
    lower: decodeReal(obj.lower, 'interval.lower'),
    upper: decodeReal(obj.upper, 'interval.upper'),
    confidence: obj.confidence,
  })
}

function intervalsToWire(intervals: readonly (readonly [number, number])[]): WireReal[][] {
  return intervals.map(([lo, hi]) => [encodeReal(lo), encodeReal(hi)])
}

/** Client for one core installation; methods are synchronous and stateless. */
export class CpdClient {
  private readonly options: RunnerOptions

  constructor(options: RunnerOptions = {}) {
    this.options = options
  }

  private call(op: string, fields: Record<string, unknown>): Record<string, unknown> {
    return callCore({ op, ...fields }, this.options)
  }

  /** Sort calibration residuals (y - yHat) / sigmaHat into a model handle. */
  fit(y: readonly number[], yHat: readonly number[], sigmaHat: readonly number[]): ConformalModel {
    requireSameLength({ y, y_hat: yHat, sigma_hat: sigmaHat })
    const result = this.call('fit', {
      y: encodeRealArray(y),
      y_hat: encodeRealArray(yHat),
      sigma_hat: encodeRealArray(sigmaHat),
    })
    return modelFromWire(result.model)
  }

  /** Per-test thresholds yHat + sigmaHat * residuals, ascending. */
  calibrationScores(model: ConformalModel, yHat: number, sigmaHat: number): number[] {
    const result = this.call('calibration_scores', {
      model: modelToWire(model),
      y_hat: encodeReal(yHat),
      sigma_hat: encodeReal(sigmaHat),
    })
    return decodeRealArray(result.scores, 'scores')
  }

  /** Stepwise predictive CDF at y for one test prediction and tau draw. */
  cdf(model: ConformalModel, yHat: number, sigmaHat: number, y: number, tau: number): number {
    const result = this.call('cdf', {
      model: modelToWire(model),
      y_hat: encodeReal(yHat),
      sigma_hat: encodeReal(sigmaHat),
      y: encodeReal(y),
      tau: encodeReal(tau),
    })
    return decodeReal(result.value, 'value')
  }

  /** Batched cdf evaluation against one model (single core round trip). */
  cdfBatch(model: ConformalModel, queries: readonly CdfQuery[]): number[] {
    const result = this.call('cdf_batch', {
      model: modelToWire(model),
      queries: queries.map((q) => ({
        y_hat: encodeReal(q.yHat),
        sigma_hat: encodeReal(q.sigmaHat),
        y: encodeReal(q.y),
        tau: encodeReal(q.tau),
      })),
    })
    return decodeRealArray(result.values, 'values')
  }

  /** Central conformal interval at significance epsilon; unbounded ends are +/-Infinity. */
  interval(model: ConformalModel, yHat: number, sigmaHat: number, epsilon: number): PredictionInterval {
    const result = this.call('interval', {
      model: modelToWire(model),
      y_hat: encodeReal(yHat),
      sigma_hat: encodeReal(sigmaHat),
      epsilon: encodeReal(epsilon),
    })
    return intervalFromWire(result.interval)
  }

  /** Root mean squared residual over a validation split (Gaussian baseline sigma). */
  gaussianFit(labels: readonly number[], preds: readonly number[]): number {
    requireSameLength({ labels, preds })
    const result = this.call('gaussian_fit', {
      labels: encodeRealArray(labels),
      preds: encodeRealArray(preds),
    })
    return decodeReal(result.sigma_fixed, 'sigma_fixed')
  }

  /** Symmetric baseline interval mu +/- sigmaFixed * probit((1+confidence)/2). */
  gaussianInterval(mu: number, sigmaFixed: number, confidence: number): PredictionInterval {
    const result = this.call('gaussian_interval', {
      mu: encodeReal(mu),
      sigma_fixed: encodeReal(sigmaFixed),
      confidence: encodeReal(confidence),
    })
    return intervalFromWire(result.interval)
  }

  /** Normal CDF of y under N(mu, sigmaFixed^2). */
  gaussianCdf(mu: number, sigmaFixed: number, y: number): number {
    const result = this.call('gaussian_cdf', {
      mu: encodeReal(mu),
      sigma_fixed: encodeReal(sigmaFixed),
      y: encodeReal(y),
    })
    return decodeReal(result.value, 'value')
  }

  /** Standard normal quantile function. */
  probit(p: number): number {
    return decodeReal(this.call('probit', { p: encodeReal(p) }).value, 'value')
  }

  /** Mean |err(eps) - eps| over the grid, plus the per-level table. */
  ece(
    labels: readonly number[],
    levels: readonly number[],
    intervalsByLevel: readonly (readonly (readonly [number, number])[])[],
  ): { ece: number; table: [number, number][] } {
    if (intervalsByLevel.length !== levels.length) {
      throw new ContractViolationError(
        `array length mismatch: levels=${levels.length}, intervalsByLevel=${intervalsByLevel.length}`,
      )
    }
    const result = this.call('ece', {
      labels: encodeRealArray(labels),
      levels: encodeRealArray(levels),
      intervals: intervalsByLevel.map(intervalsToWire),
    })
    const table = (result.table as [number, number][]).map(
      ([eps, err]) => [eps, err] as [number, number],
    )
    return { ece: decodeReal(result.ece, 'ece'), table }
  }

  /** Mean width of bounded intervals; unbounded ones are excluded and counted. */
  sharpness(intervals: readonly (readonly [number, number])[]): {
    meanWidth: number
    excludedUnbounded: number
  } {
    const result = this.call('sharpness', { intervals: intervalsToWire(intervals) })
    return {
      meanWidth: decodeReal(result.mean_width, 'mean_width'),
      excludedUnbounded: result.excluded_unbounded as number,
    }
  }

  /** Tie-corrected Mann-Whitney AUROC of scores against 0/1 flags. */
  auroc(scores: readonly number[], flags: readonly number[]): number {
    requireSameLength({ scores, flags })
    const result = this.call('auroc', { scores: encodeRealArray(scores), flags: [...flags] })
    return decodeReal(result.value, 'value')
  }

  /** Flags for labels at or below the empirical 10th percentile. */
  decileFlags(labels: readonly number[]): { flags: number[]; threshold: number } {
    const result = this.call('decile_flags', { labels: encodeRealArray(labels) })
    return {
      flags: result.flags as number[],
      threshold: decodeReal(result.threshold, 'threshold'),
    }
  }

  /** Full evaluation report for aligned predictions and true labels. */
  evaluate(
    labels: readonly number[],
    yHat: readonly number[],
    sigmaHat: readonly number[],
    options: EvaluateOptions,
  ): EvalReport {
    requireSameLength({ labels, y_hat: yHat, sigma_hat: sigmaHat })
    const fields: Record<string, unknown> = {
      labels: encodeRealArray(labels),
      y_hat: encodeRealArray(yHat),
      sigma_hat: encodeRealArray(sigmaHat),
      method: options.method,
    }
    if (options.model) fields.model = modelToWire(options.model)
    if (options.sigmaFixed !== undefined) fields.sigma_fixed = encodeReal(options.sigmaFixed)
    if (options.gridStep !== undefined) fields.grid_step = options.gridStep
    if (options.levels) fields.levels = encodeRealArray(options.levels)
    if (options.tau) fields.tau = options.tau
    if (options.sharpnessConfidences) {
      fields.sharpness_confidences = encodeRealArray(options.sharpnessConfidences)
    }
    const raw = this.call('evaluate', fields).report as Record<string, unknown>
    return Object.freeze({
      methodName: raw.method_name as string,
      ece: decodeReal(raw.ece, 'ece'),
      sharpnessAt: raw.sharpness_at as Record<string, number>,
      sharpnessExcluded: raw.sharpness_excluded as Record<string, number>,
      auroc: decodeReal(raw.auroc, 'auroc'),
      nTest: raw.n_test as number,
    })
  }

  /** Send raw sub-requests in one core round trip; returns unwrapped results. */
  batch(requests: readonly Record<string, unknown>[]): Record<string, unknown>[] {
    const result = this.call('batch', { requests: [...requests] })
    const responses = result.responses as unknown[]
    return responses.map((raw, i) => unwrapSubResponse(raw, i))
  }
}
