/**
 * Island worker shell. Long-lived: a solved island is not torn down, the
 * worker reinitializes with a fresh uuid and seed (restart is cheap, the
 * worker spawn was not). Evolution runs here so the page thread never
 * blocks; all coordination flows through messages.
 */

import { PoolExchange } from "./exchange.js";
import {
  DEFAULT_OPTIONS,
  runIslandLoop,
  type IslandOptions,
  type LoopHandle,
} from "./island.js";
import type { FromWorker, ToWorker } from "./messages.js";
import { problemFromDescriptor, type Problem } from "./problems.js";
import { randomSeed } from "./rng.js";

const scope = self as unknown as {
  onmessage: ((ev: MessageEvent<ToWorker>) => void) | null;
  postMessage(msg: FromWorker): void;
};

let problem: Problem | null = null;
let options: IslandOptions = DEFAULT_OPTIONS;
let serverUrl = "";
let label = 0;
let seed = 0;
let incarnation = 0;
let handle: LoopHandle | null = null;

function launch(): void {
  if (problem === null) return;
  const exchange = new PoolExchange(serverUrl);
  const incarnationSeed = (seed + 0x9e3779b9 * incarnation) >>> 0;
  incarnation += 1;
  handle = runIslandLoop(problem, options, incarnationSeed, exchange, {
    onIteration: (info) => scope.postMessage({ kind: "iteration", label, info }),
    onSolved: (info) => scope.postMessage({ kind: "solved", label, info }),
    onExperimentChanged: (info) => {
      scope.postMessage({ kind: "restart", label, info });
      launch(); // same worker, new uuid and seed
    },
  });
}

scope.onmessage = (event: MessageEvent<ToWorker>) => {
  const msg = event.data;
  if (msg.kind === "start") {
    serverUrl = msg.serverUrl;
    problem = problemFromDescriptor(msg.problem);
    options = msg.options;
    label = msg.label;
    seed = msg.seed >>> 0 || randomSeed();
    incarnation = 0;
    handle?.stop();
    launch();
  } else if (msg.kind === "restart") {
    handle?.stop();
    launch();
  }
};
