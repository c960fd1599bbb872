//! Extension-based classification of file paths into the 22 supported
//! languages. Files without a recognized extension are not program files.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Language {
    Ada,
    CCpp,
    Cobol,
    CSharp,
    Erlang,
    Fml,
    Fortran,
    Go,
    Java,
    JavaScript,
    Jl,
    Lisp,
    Lua,
    Perl,
    Php,
    Python,
    R,
    Ruby,
    Rust,
    Scala,
    Sql,
    Swift,
}

impl Language {
    pub const ALL: [Language; 22] = [
        Language::Ada,
        Language::CCpp,
        Language::Cobol,
        Language::CSharp,
        Language::Erlang,
        Language::Fml,
        Language::Fortran,
        Language::Go,
        Language::Java,
        Language::JavaScript,
        Language::Jl,
        Language::Lisp,
        Language::Lua,
        Language::Perl,
        Language::Php,
        Language::Python,
        Language::R,
        Language::Ruby,
        Language::Rust,
        Language::Scala,
        Language::Sql,
        Language::Swift,
    ];

    /// The exact name exported in metadata documents.
    pub fn as_str(&self) -> &'static str {
        match self {
            Language::Ada => "Ada",
            Language::CCpp => "C/C++",
            Language::Cobol => "COBOL",
            Language::CSharp => "CSharp",
            Language::Erlang => "Erlang",
            Language::Fml => "Fml",
            Language::Fortran => "Fortran",
            Language::Go => "Go",
            Language::Java => "Java",
            Language::JavaScript => "JavaScript",
            Language::Jl => "JL",
            Language::Lisp => "Lisp",
            Language::Lua => "Lua",
            Language::Perl => "Perl",
            Language::Php => "PHP",
            Language::Python => "Python",
            Language::R => "R",
            Language::Ruby => "Ruby",
            Language::Rust => "Rust",
            Language::Scala => "Scala",
            Language::Sql => "SQL",
            Language::Swift => "Swift",
        }
    }

    pub fn from_name(name: &str) -> Option<Language> {
        Language::ALL.iter().copied().find(|l| l.as_str() == name)
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Lowercase extension (without dot) → language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionTable {
    map: BTreeMap<String, Language>,
}

impl Default for ExtensionTable {
    fn default() -> Self {
        let pairs: &[(&str, Language)] = &[
            ("ada", Language::Ada),
            ("adb", Language::Ada),
            ("ads", Language::Ada),
            ("c", Language::CCpp),
            ("h", Language::CCpp),
            ("cc", Language::CCpp),
            ("cpp", Language::CCpp),
            ("cxx", Language::CCpp),
            ("hpp", Language::CCpp),
            ("hh", Language::CCpp),
            ("cob", Language::Cobol),
            ("cbl", Language::Cobol),
            ("cs", Language::CSharp),
            ("erl", Language::Erlang),
            ("hrl", Language::Erlang),
            ("ml", Language::Fml),
            ("mli", Language::Fml),
            ("fs", Language::Fml),
            ("fsi", Language::Fml),
            ("f", Language::Fortran),
            ("f77", Language::Fortran),
            ("f90", Language::Fortran),
            ("f95", Language::Fortran),
            ("f03", Language::Fortran),
            ("go", Language::Go),
            ("java", Language::Java),
            ("js", Language::JavaScript),
            ("jsx", Language::JavaScript),
            ("mjs", Language::JavaScript),
            ("jl", Language::Jl),
            ("lisp", Language::Lisp),
            ("lsp", Language::Lisp),
            ("cl", Language::Lisp),
            ("el", Language::Lisp),
            ("lua", Language::Lua),
            ("pl", Language::Perl),
            ("pm", Language::Perl),
            ("php", Language::Php),
            ("py", Language::Python),
            ("r", Language::R),
            ("rb", Language::Ruby),
            ("rs", Language::Rust),
            ("scala", Language::Scala),
            ("sc", Language::Scala),
            ("sql", Language::Sql),
            ("swift", Language::Swift),
        ];
        ExtensionTable {
            map: pairs.iter().map(|(e, l)| (e.to_string(), *l)).collect(),
        }
    }
}

impl ExtensionTable {
    /// Applies override lines `extension<TAB>LanguageName` on top of the
    /// default table. An unknown language name is a startup error.
    pub fn with_overrides(text: &str) -> Result<Self> {
        let mut table = ExtensionTable::default();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((ext, name)) = line.split_once('\t') else {
                return Err(Error::Syntax {
                    line: idx + 1,
                    msg: "override line needs extension<TAB>LanguageName".into(),
                });
            };
            let lang = Language::from_name(name).ok_or_else(|| Error::Syntax {
                line: idx + 1,
                msg: format!("unknown language name {name:?}"),
            })?;
            table.map.insert(ext.to_lowercase(), lang);
        }
        Ok(table)
    }

    /// Classifies by the extension after the last `.` of the final path
    /// segment, case-insensitively. `None` for no dot, trailing dot, or
    /// unknown extension.
    pub fn classify_path(&self, path: &str) -> Option<Language> {
        let file = path.rsplit('/').next()?;
        let (_, ext) = file.rsplit_once('.')?;
        if ext.is_empty() {
            return None;
        }
        self.map.get(&ext.to_lowercase()).copied()
    }
}
