// Client-side range validation for the settings form; mirrors the backend's
// bounds so obviously invalid input never produces a request.

export const TEMP_TARGET_RANGE: [number, number] = [-10, 20];
export const HUMIDITY_TARGET_RANGE: [number, number] = [0, 100];

export interface ValidationResult {
  ok: boolean;
  errors: { temperature?: string; humidity?: string };
}

export function validateSetpoints(temperature: number, humidity: number): ValidationResult {
  const errors: ValidationResult["errors"] = {};
  const [tLo, tHi] = TEMP_TARGET_RANGE;
  const [hLo, hHi] = HUMIDITY_TARGET_RANGE;
  if (!Number.isFinite(temperature) || temperature < tLo || temperature > tHi) {
    errors.temperature = `temperature target must be between ${tLo} and ${tHi} °C`;
  }
  if (!Number.isFinite(humidity) || humidity < hLo || humidity > hHi) {
    errors.humidity = `humidity target must be between ${hLo} and ${hHi} %RH`;
  }
  return { ok: Object.keys(errors).length === 0, errors };
}
