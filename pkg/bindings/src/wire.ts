/** Wire encoding and the subprocess runner for the cpdkit core.
 *
 * One request is a JSON object handed to `cpdkit api` on stdin; the reply
 * is a single JSON object on stdout. Non-finite reals travel as the string
 * tokens "inf" / "-inf" because strict JSON has no Infinity literal.
 * Numbers themselves round-trip exactly: both sides serialize doubles with
 * shortest-round-trip formatting.
 */

import { spawnSync } from 'node:child_process'

import { ContractViolationError, CoreProcessError, DegenerateDataError } from './errors.js'

export type WireReal = number | 'inf' | '-inf'

export interface WireError {
  type: 'contract' | 'degenerate' | string
  message: string
}

export interface WireResponse {
  ok: boolean
  result?: Record<string, unknown>
  error?: WireError
}

/** Encode a double for the wire; +/-Infinity become string tokens. */
export function encodeReal(value: number): WireReal {
  if (Number.isNaN(value)) throw new ContractViolationError('refusing to encode NaN')
  if (value === Infinity) return 'inf'
  if (value === -Infinity) return '-inf'
  return value
}

/** Decode a wire real back into a double. */
export function decodeReal(value: unknown, name: string): number {
  if (value === 'inf' || value === 'Infinity') return Infinity
  if (value === '-inf' || value === '-Infinity') return -Infinity
  if (typeof value !== 'number') {
    throw new CoreProcessError(`${name}: expected a number on the wire, got ${JSON.stringify(value)}`)
  }
  return value
}

export function encodeRealArray(values: readonly number[]): WireReal[] {
  return values.map(encodeReal)
}

export function decodeRealArray(values: unknown, name: string): number[] {
  if (!Array.isArray(values)) {
    throw new CoreProcessError(`${name}: expected an array on the wire`)
  }
  return values.map((v, i) => decodeReal(v, `${name}[${i}]`))
}

function raiseWireError(error: WireError | undefined): never {
  const message = error?.message ?? 'core returned an unspecified error'
  if (error?.type === 'degenerate') throw new DegenerateDataError(message)
  if (error?.type === 'contract') throw new ContractViolationError(message)
  throw new CoreProcessError(message)
}

export interface RunnerOptions {
  /** Command that starts the core's api mode; default ["python3", "-m", "cpdkit", "api"]. */
  command?: readonly string[]
  /** Max stdout bytes accepted from the core (default 256 MiB). */
  maxBuffer?: number
}

function coreCommand(options: RunnerOptions): readonly string[] {
  if (options.command) return options.command
  const env = process.env.CPDKIT_CORE
  if (env && env.length > 0) return env.split(' ')
  return ['python3', '-m', 'cpdkit', 'api']
}

/** Send one request object to the core and return the result payload. */
export function callCore(
  request: Record<string, unknown>,
  options: RunnerOptions = {},
): Record<string, unknown> {
  const command = coreCommand(options)
  const proc = spawnSync(command[0], command.slice(1), {
    input: JSON.stringify(request),
    encoding: 'utf8',
    maxBuffer: options.maxBuffer ?? 256 * 1024 * 1024,
  })
  if (proc.error) {
    throw new CoreProcessError(`failed to start core (${command.join(' ')}): ${proc.error.message}`)
  }
  if (proc.status !== 0) {
    throw new CoreProcessError(
      `core exited with status ${proc.status}: ${proc.stderr?.toString().trim()}`,
    )
  }
  let response: WireResponse
  try {
    response = JSON.parse(proc.stdout) as WireResponse
  } catch (exc) {
    throw new CoreProcessError(`unparseable core response: ${(exc as Error).message}`)
  }
  if (!response.ok) raiseWireError(response.error)
  if (typeof response.result !== 'object' || response.result === null) {
    throw new CoreProcessError('core response has no result object')
  }
  return response.result
}

/** Unwrap one sub-response of a batch call (same error mapping as callCore). */
export function unwrapSubResponse(raw: unknown, index: number): Record<string, unknown> {
  const response = raw as WireResponse
  if (!response || typeof response !== 'object') {
    throw new CoreProcessError(`batch response ${index} is malformed`)
  }
  if (!response.ok) raiseWireError(response.error)
  if (typeof response.result !== 'object' || response.result === null) {
    throw new CoreProcessError(`batch response ${index} has no result object`)
  }
  return response.result
}
