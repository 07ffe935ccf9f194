// DOM wiring: login gate, device selection, the 5-second polling loop, and
// render functions. All fridge state flows through the backend API; nothing
// is mutated client-side.

import { ApiClient, ApiError } from "./api";
import { drawConfidenceComparison, drawReliability } from "./calibration";
import { LineChart, sensorSeries } from "./charts";
import { drawScene } from "./scene";
import {
  DEFAULT_POLL_INTERVAL_MS,
  canSubmitSettings,
  initialState,
  isStale,
  pollLatest,
  sliceRange,
  submitSettings,
  windowSeries,
  type ViewState,
} from "./state";
import { validateSetpoints } from "./validate";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const api = new ApiClient("");
let state: ViewState = initialState("dev-0", DEFAULT_POLL_INTERVAL_MS);
let pollInFlight = false;
let windowMinutes = 60;

let tempChart: LineChart;
let humChart: LineChart;

function show(id: string, visible: boolean): void {
  $(id).classList.toggle("hidden", !visible);
}

function renderAuth(): void {
  show("login-view", state.username === null);
  show("main-view", state.username !== null);
  if (state.username !== null) {
    $("who").textContent = state.username;
  }
}

function renderBanner(): void {
  const banner = $<HTMLDivElement>("banner");
  const stale = isStale(state, Date.now());
  if (state.error) {
    banner.textContent = `backend error: ${state.error} (showing last good data)`;
    banner.className = "banner error";
  } else if (stale) {
    banner.textContent = "data is stale: no successful update for several polling intervals";
    banner.className = "banner stale";
  } else {
    banner.className = "banner hidden";
  }
}

function renderCounts(): void {
  const tbody = $<HTMLTableSectionElement>("counts-body");
  tbody.innerHTML = "";
  const counts = state.counts?.counts ?? {};
  const names = Object.keys(counts).sort();
  if (names.length === 0) {
    tbody.innerHTML = `<tr><td colspan="2" class="muted">fridge looks empty</td></tr>`;
    return;
  }
  for (const name of names) {
    const row = document.createElement("tr");
    row.innerHTML = `<td>${name}</td><td class="num">${counts[name]}</td>`;
    tbody.appendChild(row);
  }
  $("counts-ts").textContent = state.counts ? new Date(state.counts.timestamp).toLocaleTimeString() : "";
}

function renderRecipes(): void {
  const list = $<HTMLUListElement>("recipes-list");
  list.innerHTML = "";
  if (state.recipes.length === 0) {
    list.innerHTML = `<li class="muted">nothing cookable with the current contents</li>`;
    return;
  }
  for (const recipe of state.recipes) {
    const needs = Object.entries(recipe.requires)
      .map(([cls, qty]) => `${qty}× ${cls}`)
      .join(", ");
    const li = document.createElement("li");
    li.innerHTML = `<strong>${recipe.name}</strong> <span class="muted">(${needs})</span>`;
    list.appendChild(li);
  }
}

function renderCharts(): void {
  const now = Date.now();
  const latest = state.stats.length
    ? Date.parse(state.stats[state.stats.length - 1].timestamp)
    : now;
  const from = latest - windowMinutes * 60_000;
  const visible = windowSeries(sliceRange(state.stats, from, latest), 720);
  tempChart.render(sensorSeries(visible, "temperature"), state.setpoints?.temperatureTarget);
  humChart.render(sensorSeries(visible, "humidity"), state.setpoints?.humidityTarget);
  const last = visible[visible.length - 1];
  $("env-now").textContent = last
    ? `${last.temperature.toFixed(1)} °C · ${last.humidity.toFixed(1)} %RH`
    : "–";
}

function renderSettingsForm(): void {
  const enabled = canSubmitSettings(state);
  $<HTMLInputElement>("set-temp").disabled = !enabled;
  $<HTMLInputElement>("set-hum").disabled = !enabled;
  $<HTMLButtonElement>("set-submit").disabled = !enabled;
  show("settings-locked", !enabled);
  if (state.setpoints) {
    $("current-setpoints").textContent =
      `${state.setpoints.temperatureTarget.toFixed(1)} °C / ` +
      `${state.setpoints.humidityTarget.toFixed(1)} %RH`;
  }
}

function renderAll(): void {
  renderAuth();
  renderBanner();
  renderCounts();
  renderRecipes();
  renderCharts();
  renderSettingsForm();
  drawScene($<HTMLCanvasElement>("scene-canvas"), state.image);
}

async function pollOnce(): Promise<void> {
  if (pollInFlight) return; // overlapping polls coalesce
  pollInFlight = true;
  try {
    state = await pollLatest(state, api);
  } finally {
    pollInFlight = false;
  }
  renderAll();
}

async function refreshDeviceList(): Promise<void> {
  try {
    const { devices } = await api.devices();
    const select = $<HTMLSelectElement>("device-select");
    const current = state.device;
    select.innerHTML = "";
    for (const device of devices.length ? devices : [current]) {
      const option = document.createElement("option");
      option.value = device;
      option.textContent = device;
      option.selected = device === current;
      select.appendChild(option);
    }
  } catch {
    // device list is cosmetic; the poll loop reports real errors
  }
}

async function loadCalibration(): Promise<void> {
  try {
    const summary = await api.calibrationReport();
    show("calibration-section", true);
    drawReliability($<HTMLCanvasElement>("reliability-canvas"), summary);
    drawConfidenceComparison($<HTMLCanvasElement>("comparison-canvas"), summary);
    const t = summary.temperatureScaling;
    $("calibration-note").textContent =
      `temperature ${t.temperature.toFixed(3)} on ${t.model}: test ECE ` +
      `${t.testEceBefore.toFixed(4)} → ${t.testEceAfter.toFixed(4)}`;
  } catch {
    show("calibration-section", false); // no experiment reports configured
  }
}

function wireForms(): void {
  $("login-form").addEventListener("submit", async (e) => {
    e.preventDefault();
    const username = $<HTMLInputElement>("login-user").value.trim();
    const password = $<HTMLInputElement>("login-pass").value;
    const registering = (e as SubmitEvent).submitter?.id === "register-btn";
    try {
      if (registering) await api.register(username, password);
      await api.login(username, password);
      state = { ...state, username, authExpired: false, error: null };
      $("login-error").textContent = "";
      renderAll();
      void pollOnce();
    } catch (err) {
      $("login-error").textContent =
        err instanceof ApiError ? err.message : "backend unreachable";
    }
  });

  $("logout-btn").addEventListener("click", async () => {
    await api.logout();
    state = { ...state, username: null };
    renderAll();
  });

  $("device-select").addEventListener("change", (e) => {
    state = initialState((e.target as HTMLSelectElement).value, state.pollIntervalMs);
    state = { ...state, username: $("who").textContent };
    void pollOnce();
  });

  $("window-select").addEventListener("change", (e) => {
    windowMinutes = Number((e.target as HTMLSelectElement).value);
    renderCharts();
  });

  $("settings-form").addEventListener("submit", async (e) => {
    e.preventDefault();
    const temperature = Number($<HTMLInputElement>("set-temp").value);
    const humidity = Number($<HTMLInputElement>("set-hum").value);
    const validation = validateSetpoints(temperature, humidity);
    $("set-temp-error").textContent = validation.errors.temperature ?? "";
    $("set-hum-error").textContent = validation.errors.humidity ?? "";
    if (!validation.ok) return; // inline error, no request sent
    state = await submitSettings(state, api, {
      temperatureTarget: temperature,
      humidityTarget: humidity,
    });
    $("settings-ack").textContent = state.error ? "" : "accepted ✓ (device will drift toward it)";
    renderAll();
  });
}

function start(): void {
  tempChart = new LineChart($<HTMLCanvasElement>("temp-canvas"), "#e05c5c", "°C");
  humChart = new LineChart($<HTMLCanvasElement>("hum-canvas"), "#3b9dd2", "%");
  wireForms();
  renderAll();
  void refreshDeviceList();
  void loadCalibration();
  setInterval(() => void pollOnce(), state.pollIntervalMs);
  setInterval(() => void refreshDeviceList(), 30_000);
}

window.addEventListener("load", start);
