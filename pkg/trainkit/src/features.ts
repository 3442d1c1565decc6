/** Handcrafted feature vectors mirroring the engine's documented matching
 * semantics, driven by the same dictionary files the engine ships
 * (one token or regex per line, `#` comments).
 *
 * Token files: longest-first non-overlapping left-to-right scan with word
 * boundaries on word-character edges; SQL/XSS case-insensitive, OS
 * case-sensitive. Pattern files: per-line regexes counted independently.
 * Verified against engine-computed fixture vectors in tests. */

import { readFileSync } from "node:fs";
import { join } from "node:path";

import type { DetectorKind } from "./types.js";

export const SQLI_FEATURE_NAMES = [
  "sql_keywords", "sql_operators", "sql_special_chars", "boolean_conditions",
  "query_length", "union_select", "payload_patterns", "encoded_injection",
  "db_specific_keywords", "time_based_keywords", "nested_select",
] as const;

export const OSI_FEATURE_NAMES = [
  "os_commands", "os_operators", "os_special_chars", "payload_patterns",
  "pipe_operators", "variable_execution", "remote_execution",
  "sysinfo_extraction", "privilege_escalation",
] as const;

export const XSS_FEATURE_NAMES = [
  "html_tags", "js_methods", "js_file_refs", "javascript_keyword",
  "payload_length", "obfuscated_script", "special_chars", "external_resources",
] as const;

export const FEATURE_COUNTS: Record<DetectorKind, number> = {
  sqli: SQLI_FEATURE_NAMES.length,
  osi: OSI_FEATURE_NAMES.length,
  xss: XSS_FEATURE_NAMES.length,
};

const WORD = /[0-9A-Za-z_]/;

function isWord(ch: string | undefined): boolean {
  return ch !== undefined && WORD.test(ch);
}

function loadLines(dir: string, filename: string): string[] {
  const text = readFileSync(join(dir, filename), "utf-8");
  return text
    .split("\n")
    .map((line) => line.trim())
    .filter((line) => line.length > 0 && !line.startsWith("#"));
}

function scanTokens(text: string, tokens: string[], caseInsensitive: boolean): number {
  const hay = caseInsensitive ? text.toLowerCase() : text;
  const prepared = tokens
    .map((t) => (caseInsensitive ? t.toLowerCase() : t))
    .sort((a, b) => b.length - a.length);
  let count = 0;
  let i = 0;
  while (i < hay.length) {
    let advanced = false;
    for (const needle of prepared) {
      if (!hay.startsWith(needle, i)) continue;
      if (isWord(needle[0]) && i > 0 && isWord(hay[i - 1])) continue;
      const end = i + needle.length;
      if (isWord(needle[needle.length - 1]) && isWord(hay[end])) continue;
      count++;
      i = end;
      advanced = true;
      break;
    }
    if (!advanced) i++;
  }
  return count;
}

function countPattern(text: string, pattern: RegExp): number {
  let count = 0;
  for (const _ of text.matchAll(pattern)) count++;
  return count;
}

function scanPatterns(text: string, patterns: RegExp[]): number {
  let total = 0;
  for (const pattern of patterns) total += countPattern(text, pattern);
  return total;
}

function scanTags(text: string, tags: string[]): number {
  const hay = text.toLowerCase();
  const names = [...tags].map((t) => t.toLowerCase()).sort((a, b) => b.length - a.length);
  let count = 0;
  let i = 0;
  while (i < hay.length) {
    if (hay[i] !== "<") {
      i++;
      continue;
    }
    let j = i + 1;
    while (j < hay.length && " \t\r\n".includes(hay[j])) j++;
    if (hay[j] === "/") {
      j++;
      while (j < hay.length && " \t\r\n".includes(hay[j])) j++;
    }
    let matched = -1;
    for (const name of names) {
      if (hay.startsWith(name, j)) {
        const end = j + name.length;
        if (isWord(hay[end])) continue;
        matched = end;
        break;
      }
    }
    if (matched >= 0) {
      count++;
      i = matched;
    } else {
      i++;
    }
  }
  return count;
}

function scanCalls(text: string, names: string[]): number {
  const hay = text.toLowerCase();
  const prepared = names
    .map((name) => name.toLowerCase().split("."))
    .sort((a, b) => b.join("").length - a.join("").length);
  let count = 0;
  let i = 0;
  while (i < hay.length) {
    let matchedEnd = -1;
    for (const parts of prepared) {
      if (i > 0 && (isWord(hay[i - 1]) || hay[i - 1] === ".")) break;
      let j = i;
      let ok = true;
      for (let p = 0; p < parts.length; p++) {
        if (!hay.startsWith(parts[p], j)) {
          ok = false;
          break;
        }
        j += parts[p].length;
        if (p < parts.length - 1) {
          while (j < hay.length && " \t\r\n".includes(hay[j])) j++;
          if (hay[j] !== ".") {
            ok = false;
            break;
          }
          j++;
          while (j < hay.length && " \t\r\n".includes(hay[j])) j++;
        }
      }
      if (!ok) continue;
      while (j < hay.length && " \t\r\n".includes(hay[j])) j++;
      if (hay[j] === "(") {
        matchedEnd = j + 1;
        break;
      }
    }
    if (matchedEnd >= 0) {
      count++;
      i = matchedEnd;
    } else {
      i++;
    }
  }
  return count;
}

function selectPositions(text: string): number[] {
  const hay = text.toLowerCase();
  const positions: number[] = [];
  let i = hay.indexOf("select");
  while (i >= 0) {
    const beforeOk = i === 0 || !isWord(hay[i - 1]);
    const afterOk = !isWord(hay[i + 6]);
    if (beforeOk && afterOk) positions.push(i);
    i = hay.indexOf("select", i + 1);
  }
  return positions;
}

function nestedSelectCount(text: string): number {
  const positions = selectPositions(text);
  let count = 0;
  for (let index = 1; index < positions.length; index++) {
    let depth = 0;
    for (let i = 0; i < positions[index]; i++) {
      if (text[i] === "(") depth++;
      else if (text[i] === ")") depth = Math.max(0, depth - 1);
    }
    if (depth >= 1) count++;
  }
  return count;
}

export class FeatureExtractor {
  private tokens = new Map<string, string[]>();
  private patterns = new Map<string, RegExp[]>();

  constructor(private dictionariesDir: string) {}

  private tokenFile(name: string): string[] {
    let cached = this.tokens.get(name);
    if (!cached) {
      cached = loadLines(this.dictionariesDir, name);
      this.tokens.set(name, cached);
    }
    return cached;
  }

  private patternFile(name: string, caseInsensitive: boolean): RegExp[] {
    let cached = this.patterns.get(name);
    if (!cached) {
      const flags = caseInsensitive ? "gi" : "g";
      cached = loadLines(this.dictionariesDir, name).map(
        (line) => new RegExp(line, flags));
      this.patterns.set(name, cached);
    }
    return cached;
  }

  sqli(payload: string): number[] {
    return [
      scanTokens(payload, this.tokenFile("sql_keywords.txt"), true),
      scanTokens(payload, this.tokenFile("sql_operators.txt"), true),
      scanTokens(payload, this.tokenFile("sql_special_chars.txt"), true),
      scanTokens(payload, this.tokenFile("sql_boolean.txt"), true),
      Array.from(payload).length,
      scanTokens(payload, this.tokenFile("sql_union_select.txt"), true),
      scanPatterns(payload, this.patternFile("sql_patterns.txt", true)),
      scanPatterns(payload, this.patternFile("sql_encoded.txt", true)),
      scanTokens(payload, this.tokenFile("sql_db_keywords.txt"), true),
      scanTokens(payload, this.tokenFile("sql_time_keywords.txt"), true),
      nestedSelectCount(payload),
    ];
  }

  osi(payload: string): number[] {
    return [
      scanTokens(payload, this.tokenFile("os_commands.txt"), false),
      scanTokens(payload, this.tokenFile("os_operators.txt"), false),
      scanTokens(payload, this.tokenFile("os_special_chars.txt"), false),
      scanPatterns(payload, this.patternFile("os_patterns.txt", false)),
      scanTokens(payload, this.tokenFile("os_pipe_operators.txt"), false),
      scanPatterns(payload, this.patternFile("os_substitution.txt", false)),
      scanTokens(payload, this.tokenFile("os_remote_execution.txt"), false),
      scanTokens(payload, this.tokenFile("os_sysinfo.txt"), false),
      scanTokens(payload, this.tokenFile("os_privilege.txt"), false),
    ];
  }

  xss(payload: string): number[] {
    return [
      scanTags(payload, this.tokenFile("xss_tags.txt")),
      scanCalls(payload, this.tokenFile("xss_methods.txt")),
      scanPatterns(payload, this.patternFile("xss_file_refs.txt", true)),
      scanTokens(payload, this.tokenFile("xss_keywords.txt"), true),
      Array.from(payload).length,
      scanPatterns(payload, this.patternFile("xss_obfuscated.txt", true)),
      scanTokens(payload, this.tokenFile("xss_special_chars.txt"), true),
      scanPatterns(payload, this.patternFile("xss_external.txt", true)),
    ];
  }

  featuresFor(kind: DetectorKind, payload: string): number[] {
    if (kind === "sqli") return this.sqli(payload);
    if (kind === "osi") return this.osi(payload);
    return this.xss(payload);
  }
}
