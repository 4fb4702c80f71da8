use std::ops::Range;

/// Renders `message` with the file location of `span` and a caret line.
pub fn render(path: &str, source: &str, span: Option<Range<usize>>, message: &str) -> String {
    let Some(span) = span else {
        return format!("error: {message}\n --> {path}");
    };
    let start = span.start.min(source.len());
    let end = span.end.clamp(start, source.len());
    let line_start = source[..start].rfind('\n').map_or(0, |i| i + 1);
    let line_end = source[start..].find('\n').map_or(source.len(), |i| start + i);
    let line_no = source[..start].matches('\n').count() + 1;
    let col = source[line_start..start].chars().count() + 1;
    let text = &source[line_start..line_end];
    let width = source[start..end.min(line_end)].chars().count().max(1);
    let gutter = " ".repeat(line_no.to_string().len());
    format!(
        "error: {message}\n{gutter}--> {path}:{line_no}:{col}\n{gutter} |\n{line_no} | {text}\n{gutter} | {}{}",
        " ".repeat(col - 1),
        "^".repeat(width)
    )
}
