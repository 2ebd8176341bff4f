export * from "./types.js";
export * from "./ballots.js";
export * from "./client.js";
export * from "./views.js";
