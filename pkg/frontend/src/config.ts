// Development identity model: a fixed list of actors and their bearer tokens,
// matching fixtures/tokens.json on the service side. Session selection is a
// dropdown over these.

import type { SessionActor } from "./types.js";

export const CONFIG = {
  baseUrl: "http://127.0.0.1:8440",
  pollIntervalMs: 2000,
  actors: [
    { name: "Tom", token: "tom-dev" },
    { name: "Santiago Del Valle", token: "santiago-dev" },
    { name: "Warwick", token: "warwick-dev" },
    { name: "Charles Morris", token: "charles-dev" },
    { name: "Ross Honeyman", token: "ross-dev" },
  ] as SessionActor[],
};
