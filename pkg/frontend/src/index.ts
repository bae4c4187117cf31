/**
 * Thin bindings over the greeknlp core.
 *
 * The bindings contain zero NLP logic: every call marshals text into the
 * core's command-line interface and returns its canonical JSON output
 * verbatim, so binding output is byte-identical to native output. A
 * Pipeline holds no native resources between calls; construction is free
 * and `close()` exists for API symmetry.
 *
 *     const nlp = new Pipeline("pos, ner, dp");
 *     const doc = await nlp.annotate("Η Ιταλία κέρδισε την Αγγλία στον τελικό το 2020.");
 *     doc.sentences[0].tokens[1].upos  // "PROPN"
 */

import { spawn } from "child_process";

export interface GrToken {
  index: number;
  form: string;
  upos: string | null;
  feats: Record<string, string> | null;
  ner: string | null;
  head: number | null;
  deprel: string | null;
}

export interface GrSentence {
  tokens: GrToken[];
}

export interface GrDoc {
  text: string;
  transliterated: string | null;
  normalized: boolean;
  sentences: GrSentence[];
}

export interface PipelineOptions {
  /** Directory holding pos.grnlp / ner.grnlp / dp.grnlp / g2g.grnlp.
   *  Default: $GREEKNLP_MODELS, else ./models (same as the core). */
  modelsDir?: string;
  /** Python interpreter running the core. Default: $GREEKNLP_PYTHON, else python3. */
  python?: string;
  /** Head decoder for dp: "greedy" (default) or "mst". */
  decoder?: "greedy" | "mst";
}

/** A core failure, with the native exit code and stderr preserved. */
export class PipelineError extends Error {
  constructor(message: string, public readonly exitCode: number | null,
              public readonly stderr: string) {
    super(message);
    this.name = "PipelineError";
  }
}

export function defaultModelsDir(): string {
  return process.env.GREEKNLP_MODELS ?? "models";
}

export class Pipeline {
  /** Total child processes spawned by all Pipelines (test probe). */
  static spawnCount = 0;

  private readonly spec: string;
  private readonly modelsDir: string;
  private readonly python: string;
  private readonly decoder: string;
  private closed = false;

  constructor(spec: string, options: PipelineOptions = {}) {
    this.spec = spec;
    this.modelsDir = options.modelsDir ?? defaultModelsDir();
    this.python = options.python ?? process.env.GREEKNLP_PYTHON ?? "python3";
    this.decoder = options.decoder ?? "greedy";
  }

  /** Run the core's `annotate` on one document and return its output bytes
   *  verbatim (one canonical JSON line). Spec and model errors surface here
   *  as PipelineError with the core's message. */
  annotateRaw(text: string): Promise<Buffer> {
    if (this.closed) {
      return Promise.reject(new PipelineError("pipeline is closed", null, ""));
    }
    const args = [
      "-m", "greeknlp", "annotate",
      "--processors", this.spec,
      "--models", this.modelsDir,
      "--decoder", this.decoder,
      "--format", "json-lines",
    ];
    Pipeline.spawnCount += 1;
    return new Promise((resolve, reject) => {
      const child = spawn(this.python, args, { stdio: ["pipe", "pipe", "pipe"] });
      const out: Buffer[] = [];
      const err: Buffer[] = [];
      child.stdout.on("data", (chunk: Buffer) => out.push(chunk));
      child.stderr.on("data", (chunk: Buffer) => err.push(chunk));
      child.on("error", (e) => reject(new PipelineError(e.message, null, "")));
      child.on("close", (code) => {
        const stderr = Buffer.concat(err).toString("utf-8");
        if (code !== 0) {
          reject(new PipelineError(stderr.trim() || `core exited with ${code}`,
                                   code, stderr));
        } else {
          resolve(Buffer.concat(out));
        }
      });
      child.stdin.end(text.endsWith("\n") ? text : text + "\n", "utf-8");
    });
  }

  /** Annotate one document and expose per-token upos/feats/ner/head/deprel. */
  async annotate(text: string): Promise<GrDoc> {
    const raw = await this.annotateRaw(text);
    return JSON.parse(raw.toString("utf-8")) as GrDoc;
  }

  /** Convenience for g2g pipelines: the transliterated Greek text. */
  async transliterate(text: string): Promise<string> {
    const doc = await this.annotate(text);
    if (doc.transliterated === null) {
      throw new PipelineError("pipeline spec does not include g2g", null, "");
    }
    return doc.transliterated;
  }

  /** Release the handle. Pipelines hold no native resources between calls,
   *  so this only marks the wrapper unusable. */
  close(): void {
    this.closed = true;
  }
}
