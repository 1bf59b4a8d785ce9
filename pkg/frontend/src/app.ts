/** DOM wiring for the live session page.
 *
 * State changes only on user action: every click posts to the API and
 * re-renders from the returned snapshot. One request is in flight at a
 * time; inputs are disabled while waiting.
 */
import { ApiClient, ApiError } from "./client.js";
import type { SessionSnapshot } from "./types.js";
import { buildViewModel, parseEpsilon } from "./viewmodel.js";

const client = new ApiClient();

let snapshot: SessionSnapshot | null = null;
let busy = false;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function showError(message: string) {
  const banner = el<HTMLDivElement>("error-banner");
  banner.textContent = message;
  banner.hidden = false;
}

function clearError() {
  el<HTMLDivElement>("error-banner").hidden = true;
}

async function guarded(action: () => Promise<void>) {
  if (busy) return;
  busy = true;
  render();
  try {
    clearError();
    await action();
  } catch (err) {
    if (err instanceof ApiError && snapshot
        && (err.status === 409 || err.status === 410)) {
      // stale view: refresh from the server instead of crashing
      snapshot = await client.getSession(snapshot.session_id);
    } else {
      showError(err instanceof Error ? err.message : String(err));
    }
  } finally {
    busy = false;
    render();
  }
}

function renderBars(vm: ReturnType<typeof buildViewModel>) {
  const box = el<HTMLDivElement>("posterior");
  box.innerHTML = "";
  for (const bar of vm.posteriorBars) {
    const row = document.createElement("div");
    row.className = "bar-row";
    const name = document.createElement("span");
    name.className = "bar-label";
    name.textContent = bar.label;
    const track = document.createElement("div");
    track.className = "bar-track";
    const fill = document.createElement("div");
    fill.className = "bar-fill";
    fill.style.width = `${(bar.probability * 100).toFixed(1)}%`;
    const value = document.createElement("span");
    value.className = "bar-value";
    value.textContent = bar.probability.toFixed(3);
    track.appendChild(fill);
    row.append(name, track, value);
    box.appendChild(row);
  }
}

function renderHistory(vm: ReturnType<typeof buildViewModel>) {
  const list = el<HTMLUListElement>("history");
  list.innerHTML = "";
  for (const row of vm.history) {
    const item = document.createElement("li");
    item.className = `history-row ${row.tone}`;
    item.textContent = `${row.query}: ${row.answerText}`;
    list.appendChild(item);
  }
}

function renderHeatmap(vm: ReturnType<typeof buildViewModel>) {
  const table = el<HTMLTableElement>("heatmap");
  table.innerHTML = "";
  const head = table.createTHead().insertRow();
  head.insertCell().textContent = "step";
  for (const label of vm.heatmapColumns) {
    const cell = document.createElement("th");
    cell.textContent = label;
    head.appendChild(cell);
  }
  const body = table.createTBody();
  vm.heatmap.forEach((cells, step) => {
    const row = body.insertRow();
    row.insertCell().textContent = String(step);
    for (const cell of cells) {
      const td = row.insertCell();
      td.title = `${cell.label}: ${cell.probability.toFixed(3)}`;
      td.style.backgroundColor =
        `rgba(30, 110, 190, ${cell.intensity.toFixed(3)})`;
    }
  });
}

function renderAnswers(vm: ReturnType<typeof buildViewModel>) {
  el<HTMLDivElement>("query-name").textContent =
    vm.proposedQueryName ?? "";
  const box = el<HTMLDivElement>("answers");
  box.innerHTML = "";
  for (const button of vm.answerButtons) {
    const node = document.createElement("button");
    node.textContent = button.label;
    node.disabled = busy;
    node.addEventListener("click", () =>
      guarded(async () => {
        if (!snapshot?.proposed_query) return;
        snapshot = await client.answer(
          snapshot.session_id, snapshot.proposed_query.id, button.value);
      }));
    box.appendChild(node);
  }
}

function render() {
  const session = el<HTMLDivElement>("session");
  if (!snapshot) {
    session.hidden = true;
    return;
  }
  session.hidden = false;
  const vm = buildViewModel(snapshot);
  renderAnswers(vm);
  renderBars(vm);
  renderHistory(vm);
  renderHeatmap(vm);
  const banner = el<HTMLDivElement>("stop-banner");
  if (vm.banner) {
    banner.hidden = false;
    banner.textContent =
      `Prediction: ${vm.banner.prediction} (${vm.banner.stopReason})`;
  } else {
    banner.hidden = true;
  }
  el<HTMLDivElement>("ask-box").hidden = vm.status !== "AwaitingAnswer";
}

function updateStartEnabled() {
  const eps = parseEpsilon(el<HTMLInputElement>("epsilon").value);
  const rule = el<HTMLSelectElement>("rule").value;
  el<HTMLButtonElement>("start").disabled =
    busy || (rule !== "budget" && eps === null);
  el<HTMLSpanElement>("epsilon-value").textContent =
    el<HTMLInputElement>("epsilon").value;
}

function stopArgument(): string {
  const rule = el<HTMLSelectElement>("rule").value;
  const eps = el<HTMLInputElement>("epsilon").value;
  if (rule === "budget") return `budget:${el<HTMLInputElement>("budget").value}`;
  if (rule === "stability") return `stability:${eps}:2`;
  return `map:${eps}`;
}

async function init() {
  const select = el<HTMLSelectElement>("checkpoint");
  try {
    for (const ckpt of await client.listCheckpoints()) {
      const option = document.createElement("option");
      option.value = ckpt.name;
      option.textContent = `${ckpt.name} (${ckpt.num_queries} queries)`;
      select.appendChild(option);
    }
  } catch (err) {
    showError(err instanceof Error ? err.message : String(err));
  }
  el<HTMLInputElement>("epsilon").addEventListener("input", updateStartEnabled);
  el<HTMLSelectElement>("rule").addEventListener("change", updateStartEnabled);
  el<HTMLButtonElement>("start").addEventListener("click", () =>
    guarded(async () => {
      snapshot = await client.createSession(select.value, stopArgument());
    }));
  updateStartEnabled();
}

init();
