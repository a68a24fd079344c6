import { defineConfig } from "vitest/config";

// The dev server proxies API calls to a local `linkreplay serve`; the built
// bundle instead takes the API base from the `?api=` query parameter.
export default defineConfig({
  server: {
    proxy: {
      "/status": "http://127.0.0.1:8000",
      "/control": "http://127.0.0.1:8000",
      "/scenario": "http://127.0.0.1:8000",
      "/pipeline": "http://127.0.0.1:8000",
      "/events": "http://127.0.0.1:8000",
      "/report": "http://127.0.0.1:8000",
    },
  },
  test: {
    environment: "happy-dom",
  },
});
