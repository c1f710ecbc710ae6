import { readFileSync } from "fs";

// FNLS1 field dumps: one ASCII header line "FNLS1 N M L s" inside the
// first 128 bytes, then M^N little-endian float64 values in C row-major
// order over the mesh [-L, L)^N with spacing 2L/M.

export interface FieldDump {
  n: number;
  m: number;
  l: number;
  s: number;
  values: Float64Array;
}

const HEADER_CAP = 128;

export function parseFieldDump(buf: Buffer, label: string): FieldDump {
  const cap = buf.subarray(0, Math.min(buf.length, HEADER_CAP));
  const nl = cap.indexOf(0x0a);
  if (nl < 0) throw new Error(`${label}: header line missing or oversized`);
  const head = cap.subarray(0, nl);
  for (const b of head) {
    if (b < 0x20 || b > 0x7e) throw new Error(`${label}: header is not ASCII`);
  }
  const line = head.toString("ascii");
  const tokens = line.split(" ");
  if (tokens.length !== 5 || tokens[0] !== "FNLS1") {
    throw new Error(`${label}: corrupted header "${line}"`);
  }
  const [n, m, l, s] = tokens.slice(1).map(Number);
  if (![n, m, l, s].every(Number.isFinite) || !Number.isInteger(n) || !Number.isInteger(m)) {
    throw new Error(`${label}: non-numeric header "${line}"`);
  }
  const payload = buf.subarray(nl + 1);
  const expect = Math.pow(m, n) * 8;
  if (payload.length !== expect) {
    throw new Error(
      `${label}: payload is ${payload.length} bytes, header promises ${expect}`);
  }
  const values = new Float64Array(expect / 8);
  for (let i = 0; i < values.length; i++) values[i] = payload.readDoubleLE(i * 8);
  return { n, m, l, s, values };
}

export function readFieldDump(path: string): FieldDump {
  return parseFieldDump(readFileSync(path), path);
}

// coordinate of mesh index i along any axis
export function axisCoord(dump: FieldDump, i: number): number {
  return -dump.l + (2 * dump.l * i) / dump.m;
}
