import { defineConfig } from 'vitest/config'

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    // every call crosses a process boundary into the core, so be generous
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
})
