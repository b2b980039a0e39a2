/** Console wiring: launch form, session panel, regulator controls, polling. */

import { ApiClient, ApiError, FdaDecisionBody, SessionView, TrajectoryRecord } from "./api.js";
import { chartSvg } from "./chart.js";
import { consoleView } from "./state.js";
import { FormFields, validateForm } from "./validation.js";

const POLL_INTERVAL_MS = 1000;

interface AppState {
  client: ApiClient;
  sessionId: string | null;
  gtResolution: number | null;
  mutationInFlight: boolean;
  pollTimer: number | null;
}

const state: AppState = {
  client: new ApiClient(""),
  sessionId: null,
  gtResolution: null,
  mutationInFlight: false,
  pollTimer: null,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function readForm(): FormFields {
  return {
    n: el<HTMLInputElement>("field-n").value,
    horizon: el<HTMLInputElement>("field-horizon").value,
    disruptionProb: el<HTMLInputElement>("field-prob").value,
    disruptionMagnitude: el<HTMLInputElement>("field-magnitude").value,
    seed: el<HTMLInputElement>("field-seed").value,
    mode: el<HTMLSelectElement>("field-mode").value,
    forced: el<HTMLInputElement>("field-forced").checked,
    forcedDelta: el<HTMLInputElement>("field-forced-delta").value,
    forcedDuration: el<HTMLInputElement>("field-forced-duration").value,
    gtResolution: el<HTMLInputElement>("field-gt").value,
  };
}

function showFormErrors(errors: Record<string, string | undefined>): void {
  const boxes: Record<string, string> = {
    n: "err-n", horizon: "err-horizon", disruptionProb: "err-prob",
    disruptionMagnitude: "err-magnitude", seed: "err-seed", mode: "err-mode",
    forcedDelta: "err-forced-delta", forcedDuration: "err-forced-duration",
    gtResolution: "err-gt",
  };
  for (const [field, boxId] of Object.entries(boxes)) {
    el(boxId).textContent = errors[field] ?? "";
  }
}

function banner(message: string, kind: "info" | "error" = "info"): void {
  const box = el("banner");
  box.textContent = message;
  box.className = message ? `banner ${kind}` : "banner";
}

async function refresh(): Promise<void> {
  if (!state.sessionId) return;
  try {
    const [session, records] = await Promise.all([
      state.client.getSession(state.sessionId),
      state.client.trajectory(state.sessionId),
    ]);
    render(session, records);
  } catch (err) {
    banner(err instanceof Error ? err.message : String(err), "error");
  }
}

function render(session: SessionView, records: TrajectoryRecord[]): void {
  const view = consoleView(session, records);
  el("session-panel").hidden = false;
  el("session-title").textContent =
    `session ${view.id} — ${view.mode} — quarter ${view.period}/${view.horizon} — ${view.status}`;

  const patientDemand = Number(session.config["patient_demand"] ?? 1.0);
  el("chart").innerHTML = chartSvg(view.series, view.horizon, patientDemand, state.gtResolution);

  const rows = view.series.quarters.map((q, i) =>
    `<tr><td>${q}</td><td>${view.series.demand[i].toFixed(3)}</td>` +
    `<td>${view.series.supply[i].toFixed(3)}</td>` +
    `<td>${view.series.shortage[i].toFixed(4)}</td>` +
    `<td>${view.series.inventory[i].toFixed(4)}</td></tr>`).join("");
  el("series-table").innerHTML =
    `<tr><th>quarter</th><th>demand</th><th>supply</th><th>shortage</th><th>inventory</th></tr>${rows}`;

  el("history").innerHTML = view.decisions.map((d) => {
    const fda = d.fda && d.fda.severity !== "none"
      ? `<b>regulator (${d.fda.severity}, ${d.fda.confidence}):</b> ${d.fda.text} <i>${d.fda.rationale}</i>`
      : `<b>regulator:</b> no announcement`;
    const manufacturers = d.manufacturers
      .map((m) => `mfr ${m.id} invests ${(m.investFraction * 100).toFixed(0)}% (${m.confidence}): <i>${m.rationale}</i>`)
      .join("<br>");
    const buyer = d.buyer
      ? `buyer orders ${d.buyer.orderQuantity.toFixed(3)} (${d.buyer.confidence}): <i>${d.buyer.rationale}</i>`
      : "";
    return `<details open><summary>quarter ${d.period}</summary><p>${fda}</p><p>${manufacturers}</p><p>${buyer}</p></details>`;
  }).join("");

  el<HTMLButtonElement>("btn-step").disabled =
    state.mutationInFlight || view.mode !== "auto" || view.status === "finished";
  const decisionPanel = el("decision-panel");
  decisionPanel.hidden = !(view.mode === "human_fda" && view.status === "awaiting_fda");
  el<HTMLButtonElement>("btn-decide").disabled = state.mutationInFlight;
  if (view.status === "finished") {
    banner("session finished", "info");
    stopPolling();
  }
}

function startPolling(): void {
  stopPolling();
  state.pollTimer = window.setInterval(refresh, POLL_INTERVAL_MS);
}

function stopPolling(): void {
  if (state.pollTimer !== null) {
    window.clearInterval(state.pollTimer);
    state.pollTimer = null;
  }
}

async function launch(event: Event): Promise<void> {
  event.preventDefault();
  const result = validateForm(readForm());
  showFormErrors(result.errors as Record<string, string>);
  if (!result.config || !result.mode) return;
  banner("");
  try {
    const session = await state.client.createSession({ config: result.config, mode: result.mode });
    state.sessionId = session.id;
    state.gtResolution = result.gtResolution ?? null;
    await refresh();
    startPolling();
  } catch (err) {
    if (err instanceof ApiError) banner(`${err.code}: ${err.message}`, "error");
    else banner(String(err), "error");
  }
}

async function mutate(action: () => Promise<unknown>): Promise<void> {
  // One in-flight mutation per session; buttons disable while it runs.
  if (state.mutationInFlight) return;
  state.mutationInFlight = true;
  try {
    await action();
    banner("");
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      banner("quarter already decided", "error");
    } else if (err instanceof ApiError) {
      banner(`${err.code}: ${err.message}`, "error");
    } else {
      banner(String(err), "error");
    }
  } finally {
    state.mutationInFlight = false;
    await refresh();
  }
}

function readDecision(): FdaDecisionBody {
  const severity = el<HTMLSelectElement>("decision-severity").value as FdaDecisionBody["severity"];
  const text = el<HTMLTextAreaElement>("decision-text").value;
  return {
    announce: severity !== "none",
    severity,
    text: severity === "none" ? "" : text,
    confidence: el<HTMLSelectElement>("decision-confidence").value as FdaDecisionBody["confidence"],
    rationale: el<HTMLInputElement>("decision-rationale").value || "operator decision",
  };
}

export function boot(): void {
  state.client = new ApiClient(el<HTMLInputElement>("field-api").value.replace(/\/$/, ""));
  el<HTMLFormElement>("launch-form").addEventListener("submit", launch);
  el<HTMLInputElement>("field-api").addEventListener("change", (e) => {
    state.client = new ApiClient((e.target as HTMLInputElement).value.replace(/\/$/, ""));
  });
  el<HTMLButtonElement>("btn-step").addEventListener("click", () =>
    mutate(() => state.client.step(state.sessionId!)));
  el<HTMLButtonElement>("btn-decide").addEventListener("click", () =>
    mutate(() => state.client.postFdaDecision(state.sessionId!, readDecision())));
}

if (typeof document !== "undefined" && document.getElementById("launch-form")) {
  boot();
}
