// Shapes of the backend API responses. Every field rendered by the dashboard
// comes straight from one of these; the UI does display transforms only.

export interface Setpoints {
  temperatureTarget: number;
  humidityTarget: number;
}

export interface SensorRecord {
  id: string;
  deviceId: string;
  timestamp: string;
  temperature: number;
  humidity: number;
  setpoints: Setpoints;
}

export interface SceneItem {
  className: string;
  bbox: [number, number, number, number]; // x, y, w, h in the unit square
}

export interface DetectedItem extends SceneItem {
  confidence: number;
}

export interface ImageRecord {
  id: string;
  deviceId: string;
  timestamp: string;
  scene: SceneItem[];
  items: DetectedItem[];
}

export interface CountsRecord {
  id: string;
  deviceId: string;
  timestamp: string;
  counts: Record<string, number>;
  imageId: string;
}

export interface FridgestatsResponse {
  records: SensorRecord[];
  truncated: boolean;
}

export interface Recipe {
  name: string;
  requires: Record<string, number>;
}

export interface RecipesResponse {
  device: string;
  counts: Record<string, number>;
  recipes: Recipe[];
}

export interface LoginResponse {
  token: string;
  expiresAt: number;
}

export interface SettingsAck extends Setpoints {
  device: string;
  published: boolean;
}

export interface CalibrationBinJson {
  lo: number;
  hi: number;
  count: number;
  avgConfidence: number | null;
  accuracy: number | null;
}

export interface CalibrationReportJson {
  nBins: number;
  nSamples: number;
  ece: number;
  mce: number;
  oce: number;
  uce: number;
  bins: CalibrationBinJson[];
}

export interface ModelMetrics {
  accuracy: number;
  meanConfidence: number;
  confidenceAccuracyGap: number;
  ece: number;
  mce: number;
  oce: number;
  uce: number;
  report: CalibrationReportJson;
}

export interface ExperimentSummary {
  seed: number;
  epochs: number;
  models: Record<string, ModelMetrics>;
  temperatureScaling: {
    model: string;
    temperature: number;
    testEceBefore: number;
    testEceAfter: number;
    relativeEceReduction: number;
  };
  verdict: Record<string, boolean>;
}

export interface HealthResponse {
  status: string;
  collections: Record<string, number>;
  ingest: Record<string, number>;
}
