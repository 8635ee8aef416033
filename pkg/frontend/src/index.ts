export * from './config.js';
export * from './dataio.js';
export * from './layers.js';
export * from './warp.js';
export * from './model.js';
export * from './losses.js';
export * from './metrics.js';
export * from './train.js';
export * from './checkpoint.js';
export { initBackend } from './backend.js';
