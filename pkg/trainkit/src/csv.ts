/** Minimal RFC-4180 CSV reader/writer for payload,label corpora. */

export function parseCsv(text: string): string[][] {
  const rows: string[][] = [];
  let row: string[] = [];
  let cell = "";
  let inQuotes = false;
  let i = 0;
  const push = () => {
    row.push(cell);
    cell = "";
  };
  const endRow = () => {
    push();
    rows.push(row);
    row = [];
  };
  while (i < text.length) {
    const ch = text[i];
    if (inQuotes) {
      if (ch === '"') {
        if (text[i + 1] === '"') {
          cell += '"';
          i += 2;
          continue;
        }
        inQuotes = false;
        i++;
        continue;
      }
      cell += ch;
      i++;
      continue;
    }
    if (ch === '"') {
      inQuotes = true;
      i++;
    } else if (ch === ",") {
      push();
      i++;
    } else if (ch === "\r") {
      i++;
    } else if (ch === "\n") {
      endRow();
      i++;
    } else {
      cell += ch;
      i++;
    }
  }
  if (cell.length > 0 || row.length > 0) endRow();
  return rows;
}

export function formatCsv(rows: string[][]): string {
  const escape = (value: string) =>
    '"' + value.replace(/"/g, '""') + '"';
  return rows.map((row) => row.map(escape).join(",")).join("\n") + "\n";
}
