import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    // Every test shells out to the Python engine at least once.
    testTimeout: 30_000,
  },
});
