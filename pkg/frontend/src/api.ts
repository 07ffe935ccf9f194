// Thin typed client for the backend REST API. The fetch function is
// injectable so unit tests can run without a server.

import type {
  CountsRecord,
  ExperimentSummary,
  FridgestatsResponse,
  HealthResponse,
  ImageRecord,
  LoginResponse,
  RecipesResponse,
  SettingsAck,
  Setpoints,
} from "./types";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  token: string | null = null;

  constructor(
    public baseUrl: string = "",
    private fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private headers(json: boolean): Record<string, string> {
    const h: Record<string, string> = {};
    if (json) h["Content-Type"] = "application/json";
    if (this.token) h["Authorization"] = `Bearer ${this.token}`;
    return h;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: this.headers(body !== undefined),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const parsed = await response.json();
        if (parsed && typeof parsed.detail === "string") detail = parsed.detail;
      } catch {
        // keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  async register(username: string, password: string): Promise<void> {
    await this.request("POST", "/api/auth/register", { username, password });
  }

  async login(username: string, password: string): Promise<string> {
    const res = await this.request<LoginResponse>("POST", "/api/auth/login", {
      username,
      password,
    });
    this.token = res.token;
    return res.token;
  }

  async logout(): Promise<void> {
    if (!this.token) return;
    try {
      await this.request("POST", "/api/auth/logout");
    } finally {
      this.token = null;
    }
  }

  latestImage(device: string): Promise<ImageRecord> {
    return this.request("GET", `/api/latest/image?device=${encodeURIComponent(device)}`);
  }

  latestCounts(device: string): Promise<CountsRecord> {
    return this.request("GET", `/api/latest/counts?device=${encodeURIComponent(device)}`);
  }

  fridgestats(device: string, limit = 720): Promise<FridgestatsResponse> {
    return this.request(
      "GET",
      `/api/fridgestats?device=${encodeURIComponent(device)}&limit=${limit}`,
    );
  }

  recipes(device: string): Promise<RecipesResponse> {
    return this.request("GET", `/api/recipes?device=${encodeURIComponent(device)}`);
  }

  settings(device: string): Promise<SettingsAck> {
    return this.request("GET", `/api/settings?device=${encodeURIComponent(device)}`);
  }

  updateSettings(device: string, setpoints: Setpoints): Promise<SettingsAck> {
    return this.request("POST", "/api/settings", { device, ...setpoints });
  }

  calibrationReport(): Promise<ExperimentSummary> {
    return this.request("GET", "/api/calibration/report");
  }

  devices(): Promise<{ devices: string[] }> {
    return this.request("GET", "/api/devices");
  }

  health(): Promise<HealthResponse> {
    return this.request("GET", "/api/health");
  }
}
