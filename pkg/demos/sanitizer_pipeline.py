#!/usr/bin/env python3
"""Tour of the bundled sanitizer transducers.

Walks through the three web-sanitizer machines shipped with the
package — ``htmlEscape``, ``escapeString`` and ``innerHTMLDecode`` —
applies them to concrete strings, and shows why composition order
matters: escaping and then letting the browser decode can resurrect
a quote that the escaper thought it had neutralized.

Run:  python3 demos/sanitizer_pipeline.py
"""

from slsolve.automata import nfa_enumerate
from slsolve.transducer import apply_function
from slsolve.websec import WEB_ALPHABET, builtin_transducer


def rule(char: str = "=", width: int = 72) -> None:
    print(char * width)


def section(title: str) -> None:
    print()
    rule()
    print(f" {title}")
    rule()


def image(t, text: str) -> str:
    """The unique output of a functional transducer on ``text``."""
    words = nfa_enumerate(apply_function(t, text), 6 * max(len(text), 1))
    assert len(words) == 1, f"machine is not a function on {text!r}"
    return words[0]


def show(label: str, before: str, after: str) -> None:
    arrow = "  ->  " if before != after else "  ==  "
    print(f"  {label:<18} {before!r}{arrow}{after!r}")


def main() -> None:
    html = builtin_transducer("htmlEscape", WEB_ALPHABET)
    js = builtin_transducer("escapeString", WEB_ALPHABET)
    decode = builtin_transducer("innerHTMLDecode", WEB_ALPHABET)

    section("1. Each sanitizer on its own")
    print("htmlEscape rewrites HTML metacharacters to entities:")
    for text in ["Flora & Fauna", "<a href='u'>", 'a "quoted" bit']:
        show("htmlEscape", text, image(html, text))
    print()
    print("escapeString backslash-escapes quotes for a JS string literal:")
    for text in ["it's", 'a "b" c', "back\\slash"]:
        show("escapeString", text, image(js, text))
    print()
    print("innerHTMLDecode turns quote entities back into quotes, as a")
    print("browser does when markup is read back through innerHTML (other")
    print("entities such as &amp; are left alone by this model):")
    for text in ["&#39;);", "&quot;q&#34;", "&amp;", "plain"]:
        show("innerHTMLDecode", text, image(decode, text))

    section("2. The mutation gadget")
    payload = "&#39;);alert(1);//"
    print(f"payload = {payload!r}")
    print()
    print("escapeString sees no quote and no backslash, so it is a no-op:")
    show("escapeString", payload, image(js, payload))
    print()
    print("but the browser's decode step turns the entity into a real quote:")
    decoded = image(decode, payload)
    show("innerHTMLDecode", payload, decoded)
    print()
    print("Escape-then-decode therefore delivers a live single quote:")
    through = image(decode, image(js, payload))
    print(f"  decode(escape(payload)) = {through!r}")
    assert through == "');alert(1);//"
    print("  The quote closes a JS string and the rest runs as code.")

    section("3. The safe order")
    print("Decoding first, then escaping, neutralizes the same payload:")
    fixed = image(js, image(decode, payload))
    print(f"  escape(decode(payload)) = {fixed!r}")
    assert fixed == "\\');alert(1);//"
    print("  The backslash keeps the quote inert inside the literal.")

    section("4. Self-checks")
    checks = [
        ("htmlEscape ampersand", image(html, "Flora & Fauna"), "Flora &amp; Fauna"),
        ("escapeString no-op", image(js, payload), payload),
        ("decode resurrects", image(decode, payload), "');alert(1);//"),
        ("safe order escapes", fixed, "\\');alert(1);//"),
    ]
    failures = 0
    for name, got, want in checks:
        status = "ok" if got == want else "FAIL"
        failures += status != "ok"
        print(f"  [{status:>4}] {name}: {got!r}")
    if failures:
        raise SystemExit(f"{failures} check(s) failed")
    print()
    print("All checks passed.")


if __name__ == "__main__":
    main()
