export * from "./types.js";
export * from "./api.js";
export * from "./events.js";
export * from "./views/network.js";
export * from "./views/tree.js";
export * from "./views/metrics.js";
export * from "./views/inspector.js";
export * from "./views/strategy.js";
export { Explorer, browserHttp } from "./app.js";
