import type {
  DeriveJson,
  DocumentJson,
  SaveResult,
  StoreEntryJson,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

async function ensureOk(res: Response): Promise<Response> {
  if (!res.ok) {
    let detail = `${res.status} ${res.statusText}`;
    try {
      detail += `: ${await res.text()}`;
    } catch {
      // response body already consumed or unavailable
    }
    throw new ApiError(res.status, detail);
  }
  return res;
}

export class ApiClient {
  constructor(private base: string = "") {}

  private url(path: string): string {
    return this.base + path;
  }

  async listDocs(): Promise<StoreEntryJson[]> {
    const res = await ensureOk(await fetch(this.url("/api/docs")));
    return res.json();
  }

  async getDoc(
    docId: string,
    annotator?: string,
  ): Promise<{ revision: number; document: DocumentJson }> {
    const query = annotator ? `?annotator=${encodeURIComponent(annotator)}` : "";
    const res = await ensureOk(
      await fetch(this.url(`/api/docs/${encodeURIComponent(docId)}${query}`)),
    );
    return res.json();
  }

  async saveAnnotation(document: DocumentJson, revision?: number): Promise<SaveResult> {
    const query = revision === undefined ? "" : `?revision=${revision}`;
    const res = await fetch(
      this.url(`/api/docs/${encodeURIComponent(document.doc_id)}/annotation${query}`),
      {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(document),
      },
    );
    if (res.status === 409) {
      const body = await res.json();
      return { status: "conflict", revision: body.revision };
    }
    await ensureOk(res);
    const body = await res.json();
    return { status: "ok", revision: body.revision, diagnostics: body.diagnostics };
  }

  async derive(docId: string, annotator?: string): Promise<DeriveJson> {
    const query = annotator ? `?annotator=${encodeURIComponent(annotator)}` : "";
    const res = await ensureOk(
      await fetch(this.url(`/api/docs/${encodeURIComponent(docId)}/derive${query}`), {
        method: "POST",
      }),
    );
    return res.json();
  }
}
