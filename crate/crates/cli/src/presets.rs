//! Built-in experiment configs, selectable by name with `--config`.

/// Preset names in display order.
pub const NAMES: [&str; 12] = [
    "fig1",
    "fig2",
    "fig2b",
    "fig2-coeffs",
    "fig3",
    "fig3-coeffs",
    "fig4",
    "fig5",
    "fig6",
    "fig7",
    "fig8",
    "fig9",
];

const TEXTS: [&str; 12] = [
    include_str!("../presets/fig1.toml"),
    include_str!("../presets/fig2.toml"),
    include_str!("../presets/fig2b.toml"),
    include_str!("../presets/fig2-coeffs.toml"),
    include_str!("../presets/fig3.toml"),
    include_str!("../presets/fig3-coeffs.toml"),
    include_str!("../presets/fig4.toml"),
    include_str!("../presets/fig5.toml"),
    include_str!("../presets/fig6.toml"),
    include_str!("../presets/fig7.toml"),
    include_str!("../presets/fig8.toml"),
    include_str!("../presets/fig9.toml"),
];

/// TOML text of a preset.
pub fn get(name: &str) -> Option<&'static str> {
    NAMES.iter().position(|n| *n == name).map(|i| TEXTS[i])
}
