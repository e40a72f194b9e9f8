/** Typed errors mirroring the core's two failure categories. */

/** An input violates a documented precondition; message comes from the core verbatim. */
export class ContractViolationError extends Error {
  constructor(message: string) {
    super(message)
    this.name = 'ContractViolationError'
  }
}

/** Structurally valid input that is numerically degenerate (constant scores, single class, ...). */
export class DegenerateDataError extends Error {
  constructor(message: string) {
    super(message)
    this.name = 'DegenerateDataError'
  }
}

/** The core process itself failed (not found, crashed, bad wire payload). */
export class CoreProcessError extends Error {
  constructor(message: string) {
    super(message)
    this.name = 'CoreProcessError'
  }
}
