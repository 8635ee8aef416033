/** Readers and writers for the dataset contracts produced by barrelwarp:
 * 8-bit PNG images, "FDBW" flow containers, and line-delimited JSON
 * manifests. Loads divide by 255 exactly, matching the primary toolkit.
 */

import * as fs from 'fs';
import * as path from 'path';
import { PNG } from 'pngjs';

export const FLOW_MAGIC = 'FDBW';

export interface RasterImage {
  width: number;
  height: number;
  /** Row-major RGB, unit interval, length width*height*3. */
  data: Float32Array;
}

export interface FlowRaster {
  width: number;
  height: number;
  /** Row-major (du, dv) pairs, length width*height*2. */
  data: Float32Array;
}

export interface DatasetRecord {
  gt_path: string;
  distorted_path: string;
  flow_path: string;
  mask_path: string;
  k1: number;
  k2: number;
  k3: number;
  k4: number;
  f: number;
  cx: number;
  cy: number;
  s: number;
  mode: string;
  seed: number;
  k_inv?: number[];
  [extra: string]: unknown;
}

export function readPng(filePath: string): RasterImage {
  const png = PNG.sync.read(fs.readFileSync(filePath));
  const n = png.width * png.height;
  const data = new Float32Array(n * 3);
  for (let i = 0; i < n; i++) {
    data[i * 3] = png.data[i * 4] / 255;
    data[i * 3 + 1] = png.data[i * 4 + 1] / 255;
    data[i * 3 + 2] = png.data[i * 4 + 2] / 255;
  }
  return { width: png.width, height: png.height, data };
}

export function writePng(img: RasterImage, filePath: string): void {
  const png = new PNG({ width: img.width, height: img.height });
  const n = img.width * img.height;
  for (let i = 0; i < n; i++) {
    for (let c = 0; c < 3; c++) {
      const v = Math.min(Math.max(img.data[i * 3 + c], 0), 1);
      png.data[i * 4 + c] = Math.floor(v * 255 + 0.5);
    }
    png.data[i * 4 + 3] = 255;
  }
  fs.writeFileSync(filePath, PNG.sync.write(png));
}

export function readFlow(filePath: string): FlowRaster {
  const buf = fs.readFileSync(filePath);
  if (buf.length < 12) throw new Error(`${filePath}: truncated header`);
  if (buf.toString('latin1', 0, 4) !== FLOW_MAGIC) {
    throw new Error(`${filePath}: bad magic`);
  }
  const width = buf.readUInt32LE(4);
  const height = buf.readUInt32LE(8);
  const count = width * height * 2;
  if (buf.length < 12 + count * 4) throw new Error(`${filePath}: truncated payload`);
  const data = new Float32Array(count);
  for (let i = 0; i < count; i++) data[i] = buf.readFloatLE(12 + i * 4);
  return { width, height, data };
}

export function writeFlow(flow: FlowRaster, filePath: string): void {
  const buf = Buffer.alloc(12 + flow.data.length * 4);
  buf.write(FLOW_MAGIC, 0, 'latin1');
  buf.writeUInt32LE(flow.width, 4);
  buf.writeUInt32LE(flow.height, 8);
  for (let i = 0; i < flow.data.length; i++) buf.writeFloatLE(flow.data[i], 12 + i * 4);
  fs.writeFileSync(filePath, buf);
}

export function readManifest(manifestPath: string): DatasetRecord[] {
  const text = fs.readFileSync(manifestPath, 'utf-8');
  const records: DatasetRecord[] = [];
  const lines = text.split('\n');
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (!line) continue;
    try {
      records.push(JSON.parse(line) as DatasetRecord);
    } catch (err) {
      throw new Error(`${manifestPath} line ${i + 1}: ${(err as Error).message}`);
    }
  }
  return records;
}

export interface DatasetSample {
  record: DatasetRecord;
  gt: RasterImage;
  distorted: RasterImage;
  flow: FlowRaster;
}

/** Load every sample referenced by a manifest (paths resolve relative to it). */
export function loadDataset(manifestPath: string): DatasetSample[] {
  const root = path.dirname(manifestPath);
  return readManifest(manifestPath).map((record) => ({
    record,
    gt: readPng(path.join(root, record.gt_path)),
    distorted: readPng(path.join(root, record.distorted_path)),
    flow: readFlow(path.join(root, record.flow_path)),
  }));
}
