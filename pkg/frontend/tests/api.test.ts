import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function stubFetch(bodies: string[], opts?: { status?: number; delayMs?: number[] }) {
  let call = 0;
  const aborted: boolean[] = [];
  const impl = (_url: string, init?: RequestInit): Promise<Response> => {
    const index = call++;
    aborted.push(false);
    const signal = init?.signal as AbortSignal | undefined;
    return new Promise((resolve, reject) => {
      const finish = () =>
        resolve(
          new Response(bodies[index] ?? "{}", {
            status: opts?.status ?? 200,
            headers: { "Content-Type": "application/json" },
          }),
        );
      const delay = opts?.delayMs?.[index] ?? 0;
      const timer = setTimeout(finish, delay);
      signal?.addEventListener("abort", () => {
        aborted[index] = true;
        clearTimeout(timer);
        reject(new DOMException("aborted", "AbortError"));
      });
    });
  };
  return { impl, aborted };
}

describe("ApiClient", () => {
  it("returns the parsed document plus raw literals", async () => {
    const { impl } = stubFetch(['{"n":115,"variance_units":4.835555555555556}']);
    const client = new ApiClient("", impl);
    const resp = await client.post<{ n: number }>("rct", { r: 0.5 });
    expect(resp.doc.n).toBe(115);
    expect(resp.raw.get("variance_units")).toBe("4.835555555555556");
  });

  it("aborts the in-flight request when a new one starts (latest wins)", async () => {
    const { impl, aborted } = stubFetch(
      ['{"n":1}', '{"n":2}'],
      { delayMs: [50, 0] },
    );
    const client = new ApiClient("", impl);
    const first = client.post<{ n: number }>("rct", {});
    const second = client.post<{ n: number }>("rct", {});
    await expect(first).rejects.toThrow(/abort/i);
    expect((await second).doc.n).toBe(2);
    expect(aborted[0]).toBe(true);
    expect(aborted[1]).toBe(false);
  });

  it("raises a typed error for non-2xx documents", async () => {
    const { impl } = stubFetch(
      ['{"code":"infinite-variance","message":"too little overlap",' +
        '"offending_field":"phi","min_phi":0.7853981633974483}'],
      { status: 422 },
    );
    const client = new ApiClient("", impl);
    try {
      await client.post("obs", {});
      expect.unreachable();
    } catch (err) {
      expect(err).toBeInstanceOf(ApiError);
      const apiErr = err as ApiError;
      expect(apiErr.status).toBe(422);
      expect(apiErr.doc.code).toBe("infinite-variance");
      expect(apiErr.doc.min_phi).toBeCloseTo(0.7854, 4);
    }
  });
});
