/** Spawns the Python service in hermetic test mode for integration tests. */

import { spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

export interface TestServer {
  baseUrl: string;
  stop: () => Promise<void>;
}

export async function startServer(port: number): Promise<TestServer> {
  const dataDir = mkdtempSync(join(tmpdir(), 'planglow-ui-'));
  const proc: ChildProcess = spawn(
    'python3',
    [
      '-m',
      'planglow.cli',
      '--mode',
      'test',
      '--data-dir',
      dataDir,
      'serve',
      '--port',
      String(port),
    ],
    { stdio: ['ignore', 'pipe', 'pipe'] },
  );
  let output = '';
  proc.stdout?.on('data', (chunk) => (output += chunk));
  proc.stderr?.on('data', (chunk) => (output += chunk));

  const baseUrl = `http://127.0.0.1:${port}`;
  const deadline = Date.now() + 30_000;
  for (;;) {
    if (proc.exitCode !== null) {
      throw new Error(`service exited early (${proc.exitCode}):\n${output}`);
    }
    try {
      const response = await fetch(`${baseUrl}/v1/health`);
      if (response.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) {
      proc.kill('SIGKILL');
      throw new Error(`service did not come up in time:\n${output}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  return {
    baseUrl,
    stop: () =>
      new Promise<void>((resolve) => {
        proc.once('exit', () => resolve());
        proc.kill('SIGTERM');
        setTimeout(() => proc.kill('SIGKILL'), 3_000).unref();
      }),
  };
}

export const GOLDEN_FORM = {
  subject: 'GraphQL',
  goal: 'deploy a website',
  background_level: 'novice',
  duration_weeks: 2,
  daily_minutes: 60,
} as const;
