/** Messages between the page and its island workers (the only channel). */

import type { IslandOptions, IterationInfo } from "./island.js";
import type { ProblemDescriptor } from "./problems.js";

export interface StartMessage {
  kind: "start";
  serverUrl: string;
  problem: ProblemDescriptor;
  options: IslandOptions;
  seed: number;
  label: number;
}

export interface RestartMessage {
  kind: "restart";
}

export type ToWorker = StartMessage | RestartMessage;

export interface IterationMessage {
  kind: "iteration";
  label: number;
  info: IterationInfo;
}

export interface SolvedMessage {
  kind: "solved";
  label: number;
  info: IterationInfo;
}

/** The worker restarted itself because the experiment moved on. */
export interface WorkerRestartMessage {
  kind: "restart";
  label: number;
  info: IterationInfo;
}

export type FromWorker = IterationMessage | SolvedMessage | WorkerRestartMessage;
