//! Self-contained SVG heatmaps: one shaded cell per token, darkness linear
//! in the attention weight, the largest weight drawn darkest.

const CELL_HEIGHT: f64 = 52.0;
const PAD: f64 = 6.0;
const CHAR_WIDTH: f64 = 8.5;
const DARKEST: (f64, f64, f64) = (136.0, 22.0, 22.0);

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn shade(t: f64) -> String {
    let lerp = |dark: f64| 255.0 - t * (255.0 - dark);
    format!(
        "rgb({},{},{})",
        lerp(DARKEST.0).round() as u8,
        lerp(DARKEST.1).round() as u8,
        lerp(DARKEST.2).round() as u8
    )
}

/// Render one utterance. `alphas` must be the attention weights for exactly
/// these tokens; shading is `alpha / max(alpha)` so the strongest token is
/// always fully dark.
pub fn heatmap(tokens: &[String], alphas: &[f64]) -> String {
    assert_eq!(tokens.len(), alphas.len(), "one weight per token");
    let max_alpha = alphas.iter().cloned().fold(0.0, f64::max);
    let mut cells = String::new();
    let mut x = PAD;
    for (token, &alpha) in tokens.iter().zip(alphas) {
        let width = (token.chars().count() as f64 * CHAR_WIDTH + 18.0).max(44.0);
        let t = if max_alpha > 0.0 { alpha / max_alpha } else { 0.0 };
        let text_color = if t > 0.55 { "#ffffff" } else { "#111111" };
        let cx = x + width / 2.0;
        let word = escape_xml(token);
        let fill = shade(t);
        let word_y = PAD + 22.0;
        let weight_y = PAD + 40.0;
        cells.push_str(&format!(
            "<g><title>{word} = {alpha:.6}</title>\
             <rect x=\"{x:.1}\" y=\"{PAD}\" width=\"{width:.1}\" height=\"{CELL_HEIGHT}\" \
             fill=\"{fill}\" stroke=\"#999999\"/>\
             <text x=\"{cx:.1}\" y=\"{word_y:.1}\" text-anchor=\"middle\" \
             font-family=\"monospace\" font-size=\"14\" fill=\"{text_color}\">{word}</text>\
             <text x=\"{cx:.1}\" y=\"{weight_y:.1}\" text-anchor=\"middle\" \
             font-family=\"monospace\" font-size=\"10\" fill=\"{text_color}\">{alpha:.3}</text></g>"
        ));
        x += width;
    }
    let total_width = x + PAD;
    let total_height = CELL_HEIGHT + 2.0 * PAD;
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_width:.1}\" \
         height=\"{total_height}\" viewBox=\"0 0 {total_width:.1} {total_height}\">{cells}</svg>\n"
    )
}
