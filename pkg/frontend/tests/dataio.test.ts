import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';
import { describe, expect, it } from 'vitest';
import {
  FlowRaster,
  loadDataset,
  readFlow,
  readManifest,
  readPng,
  writeFlow,
  writePng,
} from '../src/dataio.js';

const FIXTURES = path.join(__dirname, 'fixtures');
const DATASET = path.join(FIXTURES, 'dataset64');

describe('flow container', () => {
  it('reads the generator-written header and payload', () => {
    const manifest = readManifest(path.join(DATASET, 'manifest.jsonl'));
    const flow = readFlow(path.join(DATASET, manifest[0].flow_path));
    expect(flow.width).toBe(64);
    expect(flow.height).toBe(64);
    expect(flow.data.length).toBe(64 * 64 * 2);
    for (const v of flow.data) expect(Number.isFinite(v)).toBe(true);
  });

  it('round-trips bit-exactly through write and read', () => {
    const data = new Float32Array(5 * 3 * 2);
    for (let i = 0; i < data.length; i++) data[i] = Math.fround(Math.sin(i) * 7.3);
    const flow: FlowRaster = { width: 3, height: 5, data };
    const tmp = path.join(os.tmpdir(), `rectnet-${process.pid}.fdbw`);
    writeFlow(flow, tmp);
    const back = readFlow(tmp);
    expect(back.width).toBe(3);
    expect(back.height).toBe(5);
    expect(Array.from(back.data)).toEqual(Array.from(data));
    expect(fs.statSync(tmp).size).toBe(12 + data.length * 4);
    fs.unlinkSync(tmp);
  });

  it('rejects foreign magic bytes', () => {
    const tmp = path.join(os.tmpdir(), `rectnet-bad-${process.pid}.fdbw`);
    fs.writeFileSync(tmp, Buffer.from('NOPE\0\0\0\0\0\0\0\0', 'latin1'));
    expect(() => readFlow(tmp)).toThrow(/magic/);
    fs.unlinkSync(tmp);
  });

  it('exposes exact probe values recorded by the generator', () => {
    const probe = JSON.parse(
      fs.readFileSync(path.join(FIXTURES, 'metrics_fixture.json'), 'utf-8'),
    );
    const flow = readFlow(path.join(DATASET, probe.flow_a));
    const { x, y, duv } = probe.flow_probe;
    expect(flow.data[(y * flow.width + x) * 2]).toBe(Math.fround(duv[0]));
    expect(flow.data[(y * flow.width + x) * 2 + 1]).toBe(Math.fround(duv[1]));
  });
});

describe('png io', () => {
  it('loads 8-bit pixels as v/255 exactly', () => {
    const probe = JSON.parse(
      fs.readFileSync(path.join(FIXTURES, 'metrics_fixture.json'), 'utf-8'),
    );
    const img = readPng(path.join(DATASET, probe.image_a));
    expect(img.width).toBe(64);
    const { x, y, rgb } = probe.pixel_probe;
    for (let c = 0; c < 3; c++) {
      expect(img.data[(y * img.width + x) * 3 + c]).toBeCloseTo(rgb[c], 9);
    }
  });

  it('round-trips rasters through write and read', () => {
    const data = new Float32Array(4 * 4 * 3);
    for (let i = 0; i < data.length; i++) data[i] = (i % 256) / 255;
    const tmp = path.join(os.tmpdir(), `rectnet-${process.pid}.png`);
    writePng({ width: 4, height: 4, data }, tmp);
    const back = readPng(tmp);
    expect(Array.from(back.data)).toEqual(Array.from(data));
    fs.unlinkSync(tmp);
  });
});

describe('manifest', () => {
  it('parses all twenty records with their parameters', () => {
    const records = readManifest(path.join(DATASET, 'manifest.jsonl'));
    expect(records.length).toBe(20);
    for (const r of records) {
      expect(typeof r.k1).toBe('number');
      expect(r.f).toBeGreaterThan(0);
      expect(r.mode).toBe('forward');
      expect(r.s).toBeGreaterThan(0);
    }
  });

  it('loads the full dataset with matching shapes', () => {
    const samples = loadDataset(path.join(DATASET, 'manifest.jsonl'));
    expect(samples.length).toBe(20);
    for (const s of samples) {
      expect(s.gt.width).toBe(64);
      expect(s.distorted.width).toBe(64);
      expect(s.flow.width).toBe(64);
    }
  });
});
