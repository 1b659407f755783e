use proptest::prelude::*;
use vert_core::pipeline::{clean_and_split, remainder};
use vert_core::Language;

/// A piece of a generated C file. Functions carry their exact text.
#[derive(Debug, Clone)]
enum Piece {
    Function { name: String, text: String },
    Other(String),
}

fn statement(depth: u32) -> BoxedStrategy<String> {
    let leaf = prop_oneof![
        Just("x = x + 1;".to_string()),
        Just("s = \"}{ ) (\";".to_string()),
        Just("c = '{';".to_string()),
        Just("/* } unbalanced { in a comment */".to_string()),
        Just("// a { line comment\n".to_string()),
        Just("a[1] = (b + 2) * 3;".to_string()),
    ];
    if depth == 0 {
        return leaf.boxed();
    }
    prop_oneof![
        3 => leaf,
        1 => proptest::collection::vec(statement(depth - 1), 0..3).prop_map(|b| format!("if (x > 0) {{\n{}\n}}", b.join("\n"))),
        1 => proptest::collection::vec(statement(depth - 1), 0..3).prop_map(|b| format!("while (y) {{ {} }}", b.join(" "))),
    ]
    .boxed()
}

fn piece(index: usize) -> impl Strategy<Value = (String, Piece)> {
    let function = (
        prop_oneof![Just("int"), Just("static unsigned long"), Just("char *"), Just("void")],
        prop_oneof![Just("(int a, int b)"), Just("(void)"), Just("(const char *s, int n[])")],
        proptest::collection::vec(statement(2), 0..4),
        prop_oneof![Just(""), Just("/* leading comment */\n"), Just("// note\n")],
    )
        .prop_map(move |(ret, params, body, lead)| {
            let name = format!("fn_{index}");
            let text = format!("{ret} {name}{params} {{\n{}\n}}", body.join("\n"));
            (lead.to_string(), Piece::Function { name, text })
        });
    let other = prop_oneof![
        Just(format!("#define WRAP_{index}(x) {{ x }}")),
        Just(format!("struct s_{index} {{ int a; int b; }};")),
        Just(format!("int g_{index} = 3;")),
        Just(format!("int table_{index}[3] = {{1, 2, 3}};")),
        Just(format!("int proto_{index}(int x);")),
        Just(format!("typedef struct {{ int v; }} t_{index};")),
    ]
    .prop_map(|s| (String::new(), Piece::Other(s)));
    prop_oneof![2 => function, 1 => other]
}

fn program() -> impl Strategy<Value = Vec<(String, Piece)>> {
    (1usize..7).prop_flat_map(|n| (0..n).map(piece).collect::<Vec<_>>())
}

fn render(pieces: &[(String, Piece)]) -> String {
    let mut out = String::new();
    for (lead, p) in pieces {
        out.push_str(lead);
        match p {
            Piece::Function { text, .. } => out.push_str(text),
            Piece::Other(s) => out.push_str(s),
        }
        out.push_str("\n\n");
    }
    out
}

proptest! {
    #[test]
    fn units_are_exactly_the_generated_functions(pieces in program()) {
        let text = render(&pieces);
        let units = clean_and_split(&text, Language::C).unwrap();
        let expected: Vec<(String, String)> = pieces
            .iter()
            .filter_map(|(_, p)| match p {
                Piece::Function { name, text } => Some((name.clone(), text.clone())),
                Piece::Other(_) => None,
            })
            .collect();
        let got: Vec<(String, String)> = units.iter().map(|u| (u.name.clone(), u.text.clone())).collect();
        prop_assert_eq!(got, expected);
        for u in &units {
            prop_assert_eq!(&text[u.range.clone()], u.text.as_str());
        }
    }

    #[test]
    fn units_and_remainder_cover_the_text(pieces in program()) {
        let text = render(&pieces);
        let units = clean_and_split(&text, Language::C).unwrap();
        let rest = remainder(&text, &units);
        let total: usize = units.iter().map(|u| u.text.len()).sum::<usize>() + rest.len();
        prop_assert_eq!(total, text.len());
        for (_, p) in &pieces {
            if let Piece::Other(s) = p {
                prop_assert!(rest.contains(s.as_str()));
            }
        }
    }

    #[test]
    fn a_dropped_closing_brace_is_reported(pieces in program()) {
        let text = render(&pieces);
        prop_assume!(text.contains("}\n"));
        let cut = text.rfind("}\n").unwrap();
        let broken = format!("{}{}", &text[..cut], &text[cut + 1..]);
        prop_assert!(clean_and_split(&broken, Language::C).is_err());
    }
}
