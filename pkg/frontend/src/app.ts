/** DOM wiring: judging screen, score table, storyboard gallery, saliency
 * viewer, status bar. All logic lives in the DOM-free modules; this file
 * only binds it to elements in index.html. */

import { ApiClient, ApiError } from "./api.js";
import { ComparisonController } from "./controller.js";
import { renderOverlayRGBA } from "./overlay.js";
import { JudgmentQueue, LocalQueueStorage } from "./queue.js";
import type { SaliencyMapJson, Score } from "./types.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const api = new ApiClient("");
const queue = new JudgmentQueue(api, new LocalQueueStorage());
const session = `web-${new Date().toISOString().slice(0, 10)}`;
const controller = new ComparisonController(api, queue, session);

// ---------------------------------------------------------------------- tabs

const panels = ["judge", "scores", "storyboard", "saliency"] as const;
type Panel = (typeof panels)[number];

function showPanel(name: Panel): void {
  for (const p of panels) {
    $(`panel-${p}`).hidden = p !== name;
    $(`tab-${p}`).classList.toggle("active", p === name);
  }
  if (name === "scores") void refreshScores();
  if (name === "storyboard") void refreshStoryboard();
}

for (const p of panels) {
  $(`tab-${p}`).addEventListener("click", () => showPanel(p));
}

// --------------------------------------------------------------------- judge

const leftImg = $<HTMLImageElement>("left-image");
const rightImg = $<HTMLImageElement>("right-image");
const judgeNote = $("judge-note");

function setJudgeEnabled(enabled: boolean): void {
  $("choose-left").toggleAttribute("disabled", !enabled);
  $("choose-right").toggleAttribute("disabled", !enabled);
  $("skip-pair").toggleAttribute("disabled", !enabled);
}

let imagesLoaded = 0;
function onPairImageLoad(): void {
  imagesLoaded += 1;
  if (imagesLoaded >= 2) setJudgeEnabled(true);
}
leftImg.addEventListener("load", onPairImageLoad);
rightImg.addEventListener("load", onPairImageLoad);

function showCurrentPair(): void {
  const pair = controller.current;
  if (!pair) return;
  imagesLoaded = 0;
  setJudgeEnabled(false); // controls stay disabled until both images load
  leftImg.src = pair.a.path;
  rightImg.src = pair.b.path;
}

function updateCounts(): void {
  $("judged-count").textContent = String(controller.judged);
  $("queue-count").textContent =
    queue.size > 0 ? `${queue.size} queued offline` : "";
}

async function judge(side: "left" | "right"): Promise<void> {
  try {
    const outcome = await controller.judge(side);
    judgeNote.textContent =
      outcome === "queued"
        ? "saved locally, will sync when the server is reachable"
        : "recorded";
  } catch (err) {
    judgeNote.textContent =
      err instanceof ApiError ? `rejected: ${err.message}` : String(err);
  }
  updateCounts();
  showCurrentPair();
}

$("choose-left").addEventListener("click", () => void judge("left"));
$("choose-right").addEventListener("click", () => void judge("right"));
$("skip-pair").addEventListener("click", () => {
  void controller.skip().then(showCurrentPair);
});

document.addEventListener("keydown", (ev) => {
  if ($("panel-judge").hidden) return;
  if (ev.key === "ArrowLeft") void judge("left");
  else if (ev.key === "ArrowRight") void judge("right");
  else if (ev.key.toLowerCase() === "s")
    void controller.skip().then(showCurrentPair);
});

window.addEventListener("online", () => {
  void queue.flush().then((sent) => {
    if (sent > 0) judgeNote.textContent = `synced ${sent} queued judgments`;
    updateCounts();
  });
});

// -------------------------------------------------------------------- scores

let scoreRows: Score[] = [];
let sortDescending = true;

function renderScoreTable(): void {
  const tbody = $("score-rows");
  tbody.innerHTML = "";
  const rows = [...scoreRows].sort((a, b) =>
    sortDescending ? b.mean - a.mean : a.mean - b.mean,
  );
  for (const row of rows) {
    const tr = document.createElement("tr");
    tr.innerHTML =
      `<td>${row.id}</td><td>${row.mean.toFixed(4)}</td>` +
      `<td>${row.variance.toFixed(4)}</td>`;
    tr.addEventListener("click", () => {
      ($("saliency-id") as HTMLInputElement).value = row.id;
      showPanel("saliency");
    });
    tbody.appendChild(tr);
  }
}

async function refreshScores(): Promise<void> {
  try {
    scoreRows = await api.getScores();
    $("scores-empty").hidden = true;
    renderScoreTable();
  } catch (err) {
    $("scores-empty").hidden = false;
    $("scores-empty").textContent =
      err instanceof ApiError && err.status === 409
        ? "No scores yet — judge some pairs and hit Recompute."
        : `Could not load scores: ${err}`;
  }
}

$("sort-mean").addEventListener("click", () => {
  sortDescending = !sortDescending;
  renderScoreTable();
});

// ---------------------------------------------------------------- storyboard

async function refreshStoryboard(): Promise<void> {
  const n = Number(($("board-n") as HTMLInputElement).value) || 24;
  const d = Number(($("board-d") as HTMLInputElement).value) || 0;
  const method = ($("board-method") as HTMLSelectElement).value;
  const gallery = $("storyboard-gallery");
  try {
    const board = await api.getStoryboard(n, d, method);
    gallery.innerHTML = "";
    for (const image of board.images) {
      const fig = document.createElement("figure");
      const img = document.createElement("img");
      img.src = image.path;
      img.alt = image.id;
      const cap = document.createElement("figcaption");
      cap.textContent = `${image.id} · ${image.score.toFixed(3)}`;
      fig.append(img, cap);
      gallery.appendChild(fig);
    }
    $("storyboard-note").textContent = board.complete
      ? `${board.images.length} images, capture order`
      : `only ${board.images.length} images satisfy the spacing`;
  } catch (err) {
    gallery.innerHTML = "";
    $("storyboard-note").textContent =
      err instanceof ApiError && err.status === 409
        ? "No scores yet — judge some pairs and hit Recompute."
        : `Could not load storyboard: ${err}`;
  }
}

$("board-refresh").addEventListener("click", () => void refreshStoryboard());

// ------------------------------------------------------------------ saliency

let lastMap: SaliencyMapJson | null = null;

function drawSaliency(): void {
  if (!lastMap) return;
  const size = lastMap.config.image_size_px;
  const canvas = $<HTMLCanvasElement>("saliency-canvas");
  canvas.width = size;
  canvas.height = size;
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const baseImage = $<HTMLImageElement>("saliency-base");
  ctx.drawImage(baseImage, 0, 0, size, size);
  const opacity = Number(($("overlay-opacity") as HTMLInputElement).value) / 100;
  const rgba = renderOverlayRGBA(lastMap, opacity);
  const tint = new OffscreenCanvas(size, size);
  const tctx = tint.getContext("2d");
  if (!tctx) return;
  tctx.putImageData(new ImageData(rgba, size, size), 0, 0);
  ctx.drawImage(tint, 0, 0);
}

async function loadSaliency(): Promise<void> {
  const id = ($("saliency-id") as HTMLInputElement).value.trim();
  if (!id) return;
  const windowPx = Number(($("saliency-window") as HTMLInputElement).value) || 16;
  const stridePx = Number(($("saliency-stride") as HTMLInputElement).value) || 16;
  $("saliency-note").textContent = "computing sweep…";
  try {
    const [map, scores] = [
      await api.getSaliency(id, windowPx, stridePx),
      scoreRows,
    ];
    lastMap = map;
    const img = $<HTMLImageElement>("saliency-base");
    img.onload = drawSaliency;
    const row = scores.find((r) => r.id === id);
    img.src =
      row && false ? "" : `/images/${encodeURIComponent(id)}.png`.replace(
        `${encodeURIComponent(id)}.png`,
        pathFor(id),
      );
    $("saliency-note").textContent =
      `base interest ${map.base_interest.toFixed(3)}; red = interest lost ` +
      `when blanked (important), blue = gained`;
  } catch (err) {
    $("saliency-note").textContent = `sweep failed: ${err}`;
  }
}

function pathFor(id: string): string {
  const fromBoard = scoreRows.length
    ? undefined
    : undefined; /* paths come from the pair/storyboard payloads */
  void fromBoard;
  const known = knownPaths.get(id);
  return known ?? `${encodeURIComponent(id)}.png`;
}

// Track id -> served path from every payload that carries one.
const knownPaths = new Map<string, string>();
const originalGetPair = api.getPair.bind(api);
api.getPair = async () => {
  const pair = await originalGetPair();
  knownPaths.set(pair.a.id, pair.a.path);
  knownPaths.set(pair.b.id, pair.b.path);
  return pair;
};
const originalGetStoryboard = api.getStoryboard.bind(api);
api.getStoryboard = async (n, d, method) => {
  const board = await originalGetStoryboard(n, d, method);
  for (const image of board.images) knownPaths.set(image.id, image.path);
  return board;
};

$("saliency-load").addEventListener("click", () => void loadSaliency());
$("overlay-opacity").addEventListener("input", drawSaliency);

// -------------------------------------------------------------------- status

async function refreshStatus(): Promise<void> {
  try {
    const status = await api.getStatus();
    $("status-line").textContent =
      `${status.log_length} judgments logged · scores cover ` +
      `${status.covered_prefix} · recompute ${status.recompute.state}` +
      (status.recompute.reason ? ` (${status.recompute.reason})` : "");
    const busy = status.recompute.state === "running";
    $("recompute").toggleAttribute("disabled", busy);
  } catch {
    $("status-line").textContent = "server unreachable";
  }
}

$("recompute").addEventListener("click", () => {
  $("status-line").textContent = "recomputing…";
  void api
    .recompute()
    .then(() => Promise.all([refreshStatus(), refreshScores()]))
    .catch((err) => {
      $("status-line").textContent = `recompute failed: ${err}`;
    });
});

// ---------------------------------------------------------------------- boot

void (async () => {
  await controller.start().catch((err) => {
    judgeNote.textContent = `cannot reach server: ${err}`;
  });
  showCurrentPair();
  updateCounts();
  await refreshStatus();
  setInterval(() => void refreshStatus(), 5000);
  if (queue.size > 0) void queue.flush().then(updateCounts);
  showPanel("judge");
})();
