/// JSON Schema (draft 2020-12) of `summary.json`.
pub const SUMMARY_SCHEMA: &str = r##"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "spinphonon run summary",
  "type": "object",
  "required": ["version", "kind", "seed", "derived", "results", "outputs", "wall_time_s", "config"],
  "properties": {
    "version": {"type": "string"},
    "kind": {
      "enum": ["odro", "chevron", "swap", "cz", "robustness", "dicke", "sd-benchmark", "leakage", "ac-stark", "pulse-design", "darkstate"]
    },
    "seed": {"type": "integer", "minimum": 0},
    "derived": {
      "type": "object",
      "required": ["g_eff_ghz", "cooperativity", "chi_ghz", "t0_ns", "t1_ns", "cz_total_ns", "gamma1", "gamma2", "gamma2_physical", "delta_gamma"],
      "properties": {
        "g_eff_ghz": {"type": ["number", "null"]},
        "g_eff_mhz": {"type": ["number", "null"]},
        "g_eff_closed_form_ghz": {"type": ["number", "null"]},
        "cooperativity": {"type": ["number", "null"]},
        "chi_ghz": {"type": ["number", "null"]},
        "dispersive_detuning_ghz": {"type": ["number", "null"]},
        "t0_ns": {"type": "number"},
        "t1_ns": {"type": "number"},
        "cz_total_ns": {"type": "number"},
        "gamma1": {"type": "number"},
        "gamma1_mod_2pi": {"type": "number"},
        "gamma2": {"type": "number"},
        "gamma2_physical": {"type": "number"},
        "delta_gamma": {"type": "number"}
      }
    },
    "results": {"type": "object"},
    "outputs": {"type": "array", "items": {"type": "string"}},
    "wall_time_s": {"type": "number", "minimum": 0},
    "config": {"type": "object"}
  }
}
"##;
