import { ApiClient } from "./api.ts";
import { boot } from "./boot.ts";
import { ViewModel } from "./model.ts";

// API base from ?api=...; empty means same origin (or the vite dev proxy)
const base = new URLSearchParams(location.search).get("api") ?? "";
boot(document, new ApiClient(base), new ViewModel());
