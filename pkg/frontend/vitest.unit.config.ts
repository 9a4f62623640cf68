import { defineConfig } from "vitest/config";

// Logic-only run: no service spawn, no e2e.
export default defineConfig({
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
    exclude: ["**/e2e.test.ts", "**/node_modules/**"],
  },
});
