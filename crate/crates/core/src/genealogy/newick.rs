use std::fmt::Write;

use super::GenealogyError;
use crate::scalar::Real;

/// A rooted tree with named leaves and branch lengths in time units.
#[derive(Clone, Debug, PartialEq)]
pub enum TreeNode<T> {
    Leaf { name: usize, length: Option<T> },
    Internal { children: Vec<TreeNode<T>>, length: Option<T> },
}

impl<T: Real> TreeNode<T> {
    pub fn length(&self) -> Option<T> {
        match self {
            TreeNode::Leaf { length, .. } | TreeNode::Internal { length, .. } => *length,
        }
    }

    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            TreeNode::Leaf { name, .. } => out.push(*name),
            TreeNode::Internal { children, .. } => children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }
}

/// Serializes a tree as Newick, lengths printed with 6 significant digits.
///
/// A single-leaf tree is written without parentheses (`1:L;`).
pub fn to_newick<T: Real>(tree: &TreeNode<T>) -> Result<String, GenealogyError> {
    let mut out = String::new();
    write_node(tree, &mut out)?;
    out.push(';');
    Ok(out)
}

fn write_node<T: Real>(node: &TreeNode<T>, out: &mut String) -> Result<(), GenealogyError> {
    match node {
        TreeNode::Leaf { name, .. } => {
            write!(out, "{name}").expect("writing to a String cannot fail");
        }
        TreeNode::Internal { children, .. } => {
            if children.is_empty() {
                return Err(GenealogyError::MalformedTree("internal node without children".into()));
            }
            out.push('(');
            for (k, child) in children.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                write_node(child, out)?;
            }
            out.push(')');
        }
    }
    if let Some(len) = node.length() {
        if !len.is_finite() || len < T::zero() {
            return Err(GenealogyError::MalformedTree(format!("invalid branch length {len}")));
        }
        out.push(':');
        out.push_str(&format_significant(len.as_f64(), 6));
    }
    Ok(())
}

/// `%g`-style formatting: `digits` significant digits, trailing zeros removed.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
