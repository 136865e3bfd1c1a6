/**
 * Typed client for the survey service API.
 *
 * The client actively enforces the blinding contract: participant-facing
 * payloads may only carry the documented fields, so any accidental leak
 * of which side is synthetic fails loudly instead of silently reaching
 * the screen.
 */

export interface PairView {
  index: number;
  total: number;
  left: string;
  right: string;
}

export interface Progress {
  participant_id: string;
  answered: number[];
  next_unanswered: number | null;
  total: number;
  complete: boolean;
}

export interface ResponseBody {
  participant_id: string;
  group: string;
  pair_index: number;
  selection: "left" | "right";
  tag: string;
  explanation: string;
}

export type SubmitOutcome =
  | { kind: "stored"; progress: Progress }
  | { kind: "conflict" }
  | { kind: "rejected"; detail: string };

export const GROUPS = ["cardiologist", "clinical_researcher", "engineer"] as const;

export const EXPLANATION_TAGS = [
  { value: "anatomy", label: "Anatomy" },
  { value: "texture_speckle", label: "Texture / speckle" },
  { value: "sector_border", label: "Sector border" },
  { value: "artifact", label: "Artifact" },
  { value: "other", label: "Other (describe below)" },
] as const;

const PAIR_FIELDS = new Set(["index", "total", "left", "right"]);

/** Throws if a pair payload carries anything beyond the blinded schema. */
export function assertBlindedPair(payload: Record<string, unknown>): PairView {
  for (const key of Object.keys(payload)) {
    if (!PAIR_FIELDS.has(key)) {
      throw new Error(`blinding violation: unexpected field '${key}' in pair payload`);
    }
  }
  const text = JSON.stringify(payload);
  if (text.includes("synth")) {
    throw new Error("blinding violation: pair payload references synthetic side");
  }
  return payload as unknown as PairView;
}

export class SurveyApi {
  constructor(private readonly baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async pair(index: number): Promise<PairView> {
    const res = await fetch(this.url(`/api/pair/${index}`));
    if (!res.ok) {
      throw new Error(`pair ${index}: HTTP ${res.status}`);
    }
    return assertBlindedPair(await res.json());
  }

  async progress(participantId: string): Promise<Progress> {
    const res = await fetch(this.url(`/api/progress/${encodeURIComponent(participantId)}`));
    if (!res.ok) {
      throw new Error(`progress: HTTP ${res.status}`);
    }
    return (await res.json()) as Progress;
  }

  async submit(body: ResponseBody): Promise<SubmitOutcome> {
    const res = await fetch(this.url("/api/response"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (res.status === 409) {
      return { kind: "conflict" };
    }
    if (res.status === 400 || res.status === 422) {
      const data = await res.json().catch(() => ({ detail: "invalid response" }));
      return { kind: "rejected", detail: String((data as { detail?: unknown }).detail) };
    }
    if (!res.ok) {
      throw new Error(`submit: HTTP ${res.status}`);
    }
    const data = (await res.json()) as Progress & { status: string };
    return { kind: "stored", progress: data };
  }

  async summary(): Promise<Record<string, unknown>> {
    const res = await fetch(this.url("/api/summary"));
    if (!res.ok) {
      throw new Error(`summary: HTTP ${res.status}`);
    }
    return (await res.json()) as Record<string, unknown>;
  }

  imageUrl(path: string): string {
    return this.url(path);
  }
}
