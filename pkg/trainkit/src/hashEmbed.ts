/** Mirror of the engine's hash_ngram embedding: character trigrams over an
 * STX/ETX-padded payload, seeded 64-bit FNV-1a, signed buckets, L2 norm.
 * Verified against the engine's committed fixture vectors in tests. */

const FNV_OFFSET = 0xcbf29ce484222325n;
const FNV_PRIME = 0x100000001b3n;
const MASK64 = (1n << 64n) - 1n;

const encoder = new TextEncoder();

function fnv1a(bytes: Uint8Array, seed: bigint): bigint {
  let h = (FNV_OFFSET ^ seed) & MASK64;
  for (const b of bytes) {
    h ^= BigInt(b);
    h = (h * FNV_PRIME) & MASK64;
  }
  return h;
}

export function hashEmbed(payload: string, dim: number, seed: number): Float64Array {
  if (dim <= 0) throw new Error("dim must be positive");
  const vec = new Float64Array(dim);
  const padded = "\x02" + payload + "\x03";
  const chars = Array.from(padded);
  const seedBig = BigInt(seed) & MASK64;
  const dimBig = BigInt(dim);
  for (let i = 0; i + 2 < chars.length; i++) {
    const gram = chars[i] + chars[i + 1] + chars[i + 2];
    const h = fnv1a(encoder.encode(gram), seedBig);
    const bucket = Number(h % dimBig);
    const sign = (h >> 63n) & 1n ? -1.0 : 1.0;
    vec[bucket] += sign;
  }
  let norm = 0;
  for (const v of vec) norm += v * v;
  norm = Math.sqrt(norm);
  if (norm > 0) {
    for (let i = 0; i < dim; i++) vec[i] /= norm;
  }
  return vec;
}
