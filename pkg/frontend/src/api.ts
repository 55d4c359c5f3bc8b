import type { ModelSummary, PredictRequest, PredictResponse, ServiceError } from "./types.js";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly detail: Record<string, unknown>;

  constructor(status: number, body: ServiceError) {
    super(body.message);
    this.code = body.code;
    this.status = status;
    this.detail = body.detail ?? {};
  }
}

async function asJson<T>(response: Response): Promise<T> {
  const body = (await response.json()) as T | ServiceError;
  if (!response.ok) {
    const err = body as ServiceError;
    throw new ApiError(response.status, {
      code: err.code ?? "UnknownError",
      message: err.message ?? `request failed with status ${response.status}`,
      detail: err.detail,
    });
  }
  return body as T;
}

/** Thin typed client for the /v1 endpoints; all statistics stay server-side. */
export class ServiceClient {
  constructor(private readonly baseUrl: string) {}

  async listModels(): Promise<ModelSummary[]> {
    return asJson(await fetch(`${this.baseUrl}/v1/models`));
  }

  async getModel(id: string): Promise<ModelSummary> {
    return asJson(await fetch(`${this.baseUrl}/v1/models/${id}`));
  }

  async predict(id: string, request: PredictRequest): Promise<PredictResponse> {
    return asJson(
      await fetch(`${this.baseUrl}/v1/models/${id}/predict`, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(request),
      }),
    );
  }
}

/**
 * Latest-submission-wins sequencing. Each key tracks its newest request;
 * responses of superseded requests resolve to null and must be discarded by
 * the caller.
 */
export class RequestSequencer {
  private readonly tokens = new Map<string, number>();

  async submit<T>(key: string, work: () => Promise<T>): Promise<T | null> {
    const token = (this.tokens.get(key) ?? 0) + 1;
    this.tokens.set(key, token);
    const result = await work();
    return this.tokens.get(key) === token ? result : null;
  }
}
