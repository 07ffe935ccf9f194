// Dashboard view state and the polling logic that feeds it.
//
// Rendered data always comes from the most recent successful fetch; a failed
// poll keeps the previous data and raises the error banner. Data older than
// three polling intervals is flagged stale.

import type { ApiClient } from "./api";
import { ApiError } from "./api";
import type {
  CountsRecord,
  ImageRecord,
  Recipe,
  SensorRecord,
  Setpoints,
} from "./types";

export const DEFAULT_POLL_INTERVAL_MS = 5000;
export const STALE_AFTER_INTERVALS = 3;

export interface ViewState {
  device: string;
  username: string | null;
  image: ImageRecord | null;
  counts: CountsRecord | null;
  stats: SensorRecord[];
  setpoints: Setpoints | null;
  recipes: Recipe[];
  pollIntervalMs: number;
  lastSuccessMs: number | null;
  error: string | null;
  authExpired: boolean;
}

export function initialState(
  device: string,
  pollIntervalMs: number = DEFAULT_POLL_INTERVAL_MS,
): ViewState {
  return {
    device,
    username: null,
    image: null,
    counts: null,
    stats: [],
    setpoints: null,
    recipes: [],
    pollIntervalMs,
    lastSuccessMs: null,
    error: null,
    authExpired: false,
  };
}

export function isStale(state: ViewState, nowMs: number): boolean {
  if (state.lastSuccessMs === null) return false; // nothing fetched yet, not "stale"
  return nowMs - state.lastSuccessMs > STALE_AFTER_INTERVALS * state.pollIntervalMs;
}

export function isLoggedIn(state: ViewState): boolean {
  return state.username !== null;
}

/** The settings form is usable only for a logged-in operator. */
export function canSubmitSettings(state: ViewState): boolean {
  return isLoggedIn(state) && !state.authExpired;
}

/** Keep at most maxPoints, preferring the newest records. */
export function windowSeries(records: SensorRecord[], maxPoints: number): SensorRecord[] {
  return records.length <= maxPoints ? records : records.slice(records.length - maxPoints);
}

/** Records within [fromMs, toMs]; zooming filters, it never invents points. */
export function sliceRange(
  records: SensorRecord[],
  fromMs: number,
  toMs: number,
): SensorRecord[] {
  return records.filter((r) => {
    const t = Date.parse(r.timestamp);
    return t >= fromMs && t <= toMs;
  });
}

/**
 * One polling round: fetch the latest image, counts, stats, recipes, and
 * setpoints. 404s (no data yet) are not errors; network/server failures keep
 * the previous data and set the banner.
 */
export async function pollLatest(
  state: ViewState,
  api: ApiClient,
  nowMs: number = Date.now(),
): Promise<ViewState> {
  const device = state.device;
  const next: ViewState = { ...state };
  try {
    const [image, counts, stats, recipes, setpoints] = await Promise.all([
      swallow404(api.latestImage(device)),
      swallow404(api.latestCounts(device)),
      api.fridgestats(device),
      api.recipes(device),
      swallow404(api.settings(device)),
    ]);
    next.image = image ?? next.image;
    next.counts = counts ?? next.counts;
    next.stats = stats.records;
    next.recipes = recipes.recipes;
    if (setpoints) {
      next.setpoints = {
        temperatureTarget: setpoints.temperatureTarget,
        humidityTarget: setpoints.humidityTarget,
      };
    } else if (stats.records.length > 0) {
      // no explicit setting stored yet: show what the device reports
      next.setpoints = stats.records[stats.records.length - 1].setpoints;
    }
    next.lastSuccessMs = nowMs;
    next.error = null;
  } catch (err) {
    next.error = err instanceof Error ? err.message : String(err);
  }
  return next;
}

async function swallow404<T>(promise: Promise<T>): Promise<T | null> {
  try {
    return await promise;
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) return null;
    throw err;
  }
}

/** Submit new setpoints; auth failures flip the state to the login flow. */
export async function submitSettings(
  state: ViewState,
  api: ApiClient,
  setpoints: Setpoints,
): Promise<ViewState> {
  const next: ViewState = { ...state };
  try {
    const ack = await api.updateSettings(state.device, setpoints);
    next.setpoints = {
      temperatureTarget: ack.temperatureTarget,
      humidityTarget: ack.humidityTarget,
    };
    next.error = null;
    next.authExpired = false;
  } catch (err) {
    if (err instanceof ApiError && err.status === 401) {
      next.authExpired = true;
      next.username = null;
      next.error = "session expired, sign in again";
    } else {
      next.error = err instanceof Error ? err.message : String(err);
    }
  }
  return next;
}
