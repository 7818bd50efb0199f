/**
 * Page boot: fetch the experiment's problem from the pool server, spawn
 * two island workers, render a live readout with a hand-drawn sparkline,
 * and restart workers (fresh uuid, same worker) whenever one solves.
 * Browsers without Worker support fall back to a single island in the
 * page context.
 */

import { DEFAULT_OPTIONS, runIslandLoop, type IterationInfo } from "./island.js";
import type { FromWorker, StartMessage } from "./messages.js";
import { PoolExchange } from "./exchange.js";
import { problemFromDescriptor, type ProblemDescriptor } from "./problems.js";
import { randomSeed } from "./rng.js";

const WORKER_COUNT = 2;

interface IslandPanel {
  status: HTMLElement;
  history: number[];
  canvas: HTMLCanvasElement;
  solutions: number;
}

function el(tag: string, parent: HTMLElement, className?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  parent.appendChild(node);
  return node;
}

function drawSparkline(panel: IslandPanel): void {
  const ctx = panel.canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = panel.canvas;
  ctx.clearRect(0, 0, width, height);
  const data = panel.history.slice(-200);
  if (data.length < 2) return;
  const lo = Math.min(...data);
  const hi = Math.max(...data);
  const span = hi - lo || 1;
  ctx.beginPath();
  data.forEach((v, i) => {
    const x = (i / (data.length - 1)) * (width - 4) + 2;
    const y = height - 3 - ((v - lo) / span) * (height - 6);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.strokeStyle = "#2a6f4e";
  ctx.lineWidth = 1.5;
  ctx.stroke();
}

function buildPanel(root: HTMLElement, label: number): IslandPanel {
  const box = el("div", root, "island");
  el("h3", box).textContent = `island ${label}`;
  const canvas = el("canvas", box) as HTMLCanvasElement;
  canvas.width = 280;
  canvas.height = 60;
  const status = el("pre", box);
  status.textContent = "waiting for first generations...";
  return { status, history: [], canvas, solutions: 0 };
}

function updatePanel(panel: IslandPanel, info: IterationInfo, note: string): void {
  panel.history.push(info.bestFitness);
  panel.status.textContent =
    `uuid        ${info.uuid.slice(0, 8)}\n` +
    `generation  ${info.generation}\n` +
    `evaluations ${info.evaluations}\n` +
    `best        ${info.bestFitness.toFixed(4)} (${info.genomeSummary})\n` +
    `solutions   ${panel.solutions}${note ? "\n" + note : ""}`;
  drawSparkline(panel);
}

async function fetchProblem(serverUrl: string): Promise<ProblemDescriptor> {
  const params = new URLSearchParams(location.search);
  const resp = await fetch(`${serverUrl}/v1/problem`);
  if (!resp.ok) throw new Error(`problem route returned ${resp.status}`);
  const descriptor = (await resp.json()) as ProblemDescriptor;
  // ?problem=f15 forces the floating-point benchmark when the server runs it
  const wanted = params.get("problem");
  if (wanted && wanted !== descriptor.kind) {
    throw new Error(
      `page asked for ${wanted} but the server runs ${descriptor.kind}`,
    );
  }
  return descriptor;
}

async function boot(): Promise<void> {
  const root = document.getElementById("islands");
  const banner = document.getElementById("banner");
  if (!root || !banner) return;
  const serverUrl = location.origin;
  let descriptor: ProblemDescriptor;
  try {
    descriptor = await fetchProblem(serverUrl);
  } catch (err) {
    banner.textContent = `cannot reach the pool server: ${String(err)}`;
    return;
  }
  banner.textContent = `problem: ${descriptor.kind} - contributing to ${serverUrl}`;

  const options = { ...DEFAULT_OPTIONS };
  if (typeof Worker === "undefined") {
    // basic mode: one island in the page context
    banner.textContent += " (no Worker support: basic single-island mode)";
    const panel = buildPanel(root, 0);
    const problem = problemFromDescriptor(descriptor);
    const spin = () => {
      const exchange = new PoolExchange(serverUrl);
      const handle = runIslandLoop(problem, options, randomSeed(), exchange, {
        onIteration: (info) => updatePanel(panel, info, ""),
        onSolved: (info) => {
          panel.solutions += 1;
          updatePanel(panel, info, "solved! restarting");
          spin();
        },
      });
      void handle;
    };
    spin();
    return;
  }

  for (let label = 0; label < WORKER_COUNT; label += 1) {
    const worker = new Worker("dist/worker.js", { type: "module" });
    const panel = buildPanel(root, label);
    worker.onmessage = (event: MessageEvent<FromWorker>) => {
      const msg = event.data;
      if (msg.kind === "iteration") {
        updatePanel(panel, msg.info, "");
      } else if (msg.kind === "solved") {
        panel.solutions += 1;
        updatePanel(panel, msg.info, "solved! worker restarts with a new uuid");
        worker.postMessage({ kind: "restart" });
      } else if (msg.kind === "restart") {
        updatePanel(panel, msg.info, "experiment moved on; island restarted");
      }
    };
    const start: StartMessage = {
      kind: "start",
      serverUrl,
      problem: descriptor,
      options,
      seed: randomSeed() + label,
      label,
    };
    worker.postMessage(start);
  }
}

void boot();
