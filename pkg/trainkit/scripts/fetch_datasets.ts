/** Fetch the public paper-scale corpora into data/raw/.
 *
 * Not runnable offline: the hosts below are external. Desk-scale training
 * uses the committed synthetic corpora in ../data/corpora instead.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

const SOURCES: Array<{ name: string; url: string }> = [
  { name: "sqli_kaggle.csv",
    url: "https://www.kaggle.com/datasets/syedsaqlainhussain/sql-injection-dataset" },
  { name: "os_command_injection.csv",
    url: "https://github.com/payloadbox/command-injection-payload-list" },
  { name: "xss_payloads_1.csv",
    url: "https://github.com/payloadbox/xss-payload-list" },
  { name: "xss_payloads_2.csv",
    url: "https://www.kaggle.com/datasets/syedsaqlainhussain/cross-site-scripting-xss-dataset-for-deep-learning" },
];

async function main(): Promise<void> {
  const outDir = join(process.cwd(), "data", "raw");
  mkdirSync(outDir, { recursive: true });
  let failures = 0;
  for (const source of SOURCES) {
    try {
      const response = await fetch(source.url);
      if (!response.ok) throw new Error(`HTTP ${response.status}`);
      writeFileSync(join(outDir, source.name), Buffer.from(await response.arrayBuffer()));
      console.log(`fetched ${source.name}`);
    } catch (error) {
      failures++;
      console.error(`could not fetch ${source.name} from ${source.url}: ${error}`);
      console.error("  (paper-scale corpora require network access and, for "
        + "the Kaggle sets, authentication; download manually into data/raw/)");
    }
  }
  process.exit(failures === SOURCES.length ? 1 : 0);
}

main();
