import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    globalSetup: ["tests/global-setup.ts"],
    // Tests talk to a real registry process, so allow for startup latency.
    testTimeout: 30_000,
    hookTimeout: 60_000,
  },
});
