/** Client-side validation of the launch form against the scenario bounds. */

export interface FormFields {
  n: string;
  horizon: string;
  disruptionProb: string;
  disruptionMagnitude: string;
  seed: string;
  mode: string;
  forced: boolean;
  forcedDelta: string;
  forcedDuration: string;
  gtResolution: string; // optional chart marker, quarters
}

export interface ValidationResult {
  errors: Partial<Record<keyof FormFields, string>>;
  config?: Record<string, unknown>;
  mode?: "auto" | "human_fda";
  gtResolution?: number | null;
}

function intIn(value: string, lo: number, hi: number): number | null {
  if (!/^-?\d+$/.test(value.trim())) return null;
  const parsed = parseInt(value, 10);
  return parsed >= lo && parsed <= hi ? parsed : null;
}

function floatIn(value: string, lo: number, hi: number): number | null {
  const parsed = Number(value);
  if (!Number.isFinite(parsed)) return null;
  return parsed >= lo && parsed <= hi ? parsed : null;
}

/** Mirrors the server-side config invariants so bad launches never leave the page. */
export function validateForm(fields: FormFields): ValidationResult {
  const errors: ValidationResult["errors"] = {};

  const n = intIn(fields.n, 2, 10);
  if (n === null) errors.n = "an integer between 2 and 10";
  const horizon = intIn(fields.horizon, 4, 12);
  if (horizon === null) errors.horizon = "between 4 and 12 quarters";
  const prob = floatIn(fields.disruptionProb, 0, 1);
  if (prob === null) errors.disruptionProb = "a probability in [0, 1]";
  const magnitude = floatIn(fields.disruptionMagnitude, 0, 1);
  if (magnitude === null) errors.disruptionMagnitude = "a fraction in [0, 1]";
  const seed = intIn(fields.seed, -(2 ** 31), 2 ** 31);
  if (seed === null) errors.seed = "an integer seed";
  const mode = fields.mode === "human_fda" ? "human_fda" : fields.mode === "auto" ? "auto" : null;
  if (mode === null) errors.mode = "auto or human_fda";

  let forcedDelta: number | null = null;
  let forcedDuration: number | null = null;
  if (fields.forced) {
    forcedDelta = floatIn(fields.forcedDelta, 0, 1);
    if (forcedDelta === null) errors.forcedDelta = "a fraction in [0, 1]";
    if (horizon !== null) {
      forcedDuration = fields.forcedDuration.trim() === ""
        ? horizon
        : intIn(fields.forcedDuration, 1, horizon);
      if (forcedDuration === null) errors.forcedDuration = `between 1 and ${horizon}`;
    }
  }

  let gtResolution: number | null = null;
  if (fields.gtResolution.trim() !== "") {
    gtResolution = intIn(fields.gtResolution, 1, 13);
    if (gtResolution === null) errors.gtResolution = "a quarter number";
  }

  if (Object.keys(errors).length > 0) return { errors };

  const config: Record<string, unknown> = {
    n,
    horizon,
    disruption_prob: prob,
    disruption_magnitude: magnitude,
    seed,
  };
  if (fields.forced) {
    config.forced = { deltas: { "0": forcedDelta }, duration: forcedDuration };
  }
  return { errors: {}, config, mode: mode as "auto" | "human_fda", gtResolution };
}
