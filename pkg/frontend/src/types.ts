/** Wire types of the /v1 prediction service. */

export interface CovariateMeta {
  readonly name: string;
  readonly kind: "binary" | "numeric";
  readonly min: number;
  readonly max: number;
}

export interface TrainingSummary {
  readonly n: number;
  readonly events: number;
  readonly censoring_rate: number;
  readonly eta: number;
}

export interface ModelSummary {
  readonly id: string;
  readonly created_at: string | null;
  readonly seed: number;
  readonly config: { readonly alpha: number; readonly working_model: string } & Record<
    string,
    unknown
  >;
  readonly covariate_names: readonly string[];
  readonly covariates: readonly CovariateMeta[];
  readonly training_summary: TrainingSummary;
}

export interface ScenarioRequest {
  readonly name?: string;
  readonly overrides: Readonly<Record<string, number>>;
}

export interface PredictRequest {
  readonly covariates: Readonly<Record<string, number>>;
  readonly alpha?: number;
  readonly c_L?: number;
  readonly scenarios?: readonly ScenarioRequest[];
}

export interface IntervalPayload {
  readonly scenario: string | null;
  readonly covariates: Readonly<Record<string, number>>;
  readonly lower: number;
  /** null means unbounded (one-sided interval). */
  readonly upper: number | null;
  readonly capped: boolean;
  readonly alpha: number;
  readonly c_L: number;
}

export interface PredictResponse {
  readonly model_id: string;
  readonly alpha: number;
  readonly c_L: number;
  readonly intervals: readonly IntervalPayload[];
}

export interface ServiceError {
  readonly code: string;
  readonly message: string;
  readonly detail?: Record<string, unknown>;
}
