//! Deep-embedded program syntax.

use std::fmt;
use std::rc::Rc;

use super::domain::FiniteDomain;
use super::value::Value;
use crate::fixpoint::CallSite;

/// Program states. Equality is extensional: two states are the same state
/// exactly when they compare equal.
pub trait State: Clone + Ord + fmt::Debug + 'static {}
impl<T: Clone + Ord + fmt::Debug + 'static> State for T {}

pub type StatePred<S> = Rc<dyn Fn(&S) -> bool>;
pub type Relation<S> = Rc<dyn Fn(&S, &S) -> bool>;
pub type Image<S> = Rc<dyn Fn(&S) -> Vec<S>>;
pub type StepFn<S> = Rc<dyn Fn(&S) -> Vec<(Value, S)>>;
/// The recursion handle handed to a functional: maps an argument to the
/// program standing for the recursive call.
pub type Handle<S> = Rc<dyn Fn(&Value) -> Prog<S>>;
pub type Functional<S> = Rc<dyn Fn(&Handle<S>, &Value) -> Prog<S>>;

type ContFn<S> = Rc<dyn Fn(&Value, Option<&str>) -> Prog<S>>;

/// The second argument of `bind`.
///
/// The continuation receives the intermediate value together with its
/// symbolic rendering when one is known (only the VC generator supplies it).
pub struct Continuation<S> {
    f: ContFn<S>,
    kind: ContKind,
    label: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ContKind {
    General,
    Identity,
}

impl<S> Clone for Continuation<S> {
    fn clone(&self) -> Self {
        Continuation {
            f: self.f.clone(),
            kind: self.kind,
            label: self.label.clone(),
        }
    }
}

impl<S: State> Continuation<S> {
    pub fn new(label: impl Into<String>, f: impl Fn(&Value) -> Prog<S> + 'static) -> Self {
        Continuation {
            f: Rc::new(move |v, _| f(v)),
            kind: ContKind::General,
            label: label.into(),
        }
    }

    /// A continuation that also sees the symbolic text of its argument.
    pub fn with_sym(
        label: impl Into<String>,
        f: impl Fn(&Value, Option<&str>) -> Prog<S> + 'static,
    ) -> Self {
        Continuation {
            f: Rc::new(f),
            kind: ContKind::General,
            label: label.into(),
        }
    }

    /// `ret` as a continuation; the normalizer drops `bind(c, ret)` to `c`.
    pub fn ret() -> Self {
        Continuation {
            f: Rc::new(|v, sym| Prog::ret_sym(v.clone(), sym.map(str::to_string))),
            kind: ContKind::Identity,
            label: "ret".into(),
        }
    }

    pub fn apply(&self, v: &Value) -> Prog<S> {
        (self.f)(v, None)
    }

    pub fn apply_sym(&self, v: &Value, sym: Option<&str>) -> Prog<S> {
        (self.f)(v, sym)
    }

    pub fn is_identity(&self) -> bool {
        self.kind == ContKind::Identity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Post-composes every produced program with `g`, keeping the label.
    pub fn map(&self, g: impl Fn(Prog<S>) -> Prog<S> + 'static) -> Self {
        let f = self.f.clone();
        Continuation {
            f: Rc::new(move |v, sym| g(f(v, sym))),
            kind: ContKind::General,
            label: self.label.clone(),
        }
    }
}

/// The syntax constructors.
pub enum Node<S> {
    Ret {
        value: Value,
        /// Symbolic text of the returned payload, e.g. `x/2`. For
        /// `by_continue`/`by_break` values this describes the payload.
        sym: Option<String>,
    },
    Bind {
        first: Prog<S>,
        rest: Continuation<S>,
    },
    Choice(Prog<S>, Prog<S>),
    Assume {
        label: String,
        pred: StatePred<S>,
    },
    /// `assume'`: a proposition that does not mention the state.
    AssumePure {
        label: String,
        holds: bool,
    },
    Any(FiniteDomain<Value>),
    Update {
        label: String,
        rel: Relation<S>,
        /// Optional successor enumerator. When present, evaluation only
        /// tests `rel` on these candidates instead of the whole state domain,
        /// so it must cover every successor the relation admits.
        image: Option<Image<S>>,
    },
    Step {
        label: String,
        outcomes: StepFn<S>,
    },
    Rec {
        label: String,
        body: Functional<S>,
        arg: Value,
    },
    /// Application of a recursion handle inside a `Rec` body.
    Call(CallSite<S>),
}

/// A program: a cheaply clonable handle to a syntax node.
pub struct Prog<S>(Rc<Node<S>>);

impl<S> Clone for Prog<S> {
    fn clone(&self) -> Self {
        Prog(self.0.clone())
    }
}

/// Label used for the syntactically empty program `assume'(false)`.
pub const FALSE_LABEL: &str = "false";

impl<S: State> Prog<S> {
    pub fn from_node(node: Node<S>) -> Self {
        Prog(Rc::new(node))
    }

    pub fn node(&self) -> &Node<S> {
        &self.0
    }

    pub fn ptr_eq(&self, other: &Prog<S>) -> bool {
        Rc::ptr_eq(&self.0, &other.0)
    }

    pub fn ret(value: impl Into<Value>) -> Self {
        Prog::from_node(Node::Ret {
            value: value.into(),
            sym: None,
        })
    }

    pub fn ret_sym(value: Value, sym: Option<String>) -> Self {
        Prog::from_node(Node::Ret { value, sym })
    }

    /// `ret` with the symbolic text used when rendering VCs.
    pub fn ret_as(value: impl Into<Value>, sym: impl Into<String>) -> Self {
        Prog::ret_sym(value.into(), Some(sym.into()))
    }

    pub fn bind(first: Prog<S>, rest: Continuation<S>) -> Self {
        Prog::from_node(Node::Bind { first, rest })
    }

    /// `x <- first;; rest(x)`
    pub fn then(self, label: impl Into<String>, rest: impl Fn(&Value) -> Prog<S> + 'static) -> Self {
        Prog::bind(self, Continuation::new(label, rest))
    }

    pub fn then_cont(self, rest: Continuation<S>) -> Self {
        Prog::bind(self, rest)
    }

    /// `first;; next`, discarding the first result.
    pub fn seq(self, next: Prog<S>) -> Self {
        let label = format!("_ ↦ {}", next.describe());
        Prog::bind(self, Continuation::new(label, move |_| next.clone()))
    }

    pub fn choice(left: Prog<S>, right: Prog<S>) -> Self {
        Prog::from_node(Node::Choice(left, right))
    }

    pub fn assume(label: impl Into<String>, pred: impl Fn(&S) -> bool + 'static) -> Self {
        Prog::from_node(Node::Assume {
            label: label.into(),
            pred: Rc::new(pred),
        })
    }

    pub fn assume_pure(label: impl Into<String>, holds: bool) -> Self {
        Prog::from_node(Node::AssumePure {
            label: label.into(),
            holds,
        })
    }

    /// The program with no outcomes.
    pub fn fail() -> Self {
        Prog::assume_pure(FALSE_LABEL, false)
    }

    pub fn any(dom: FiniteDomain<Value>) -> Self {
        Prog::from_node(Node::Any(dom))
    }

    pub fn update(label: impl Into<String>, rel: impl Fn(&S, &S) -> bool + 'static) -> Self {
        Prog::from_node(Node::Update {
            label: label.into(),
            rel: Rc::new(rel),
            image: None,
        })
    }

    /// `update(rel)` evaluated through a successor enumerator.
    pub fn update_with_image(
        label: impl Into<String>,
        rel: impl Fn(&S, &S) -> bool + 'static,
        image: impl Fn(&S) -> Vec<S> + 'static,
    ) -> Self {
        Prog::from_node(Node::Update {
            label: label.into(),
            rel: Rc::new(rel),
            image: Some(Rc::new(image)),
        })
    }

    pub fn step(label: impl Into<String>, outcomes: impl Fn(&S) -> Vec<(Value, S)> + 'static) -> Self {
        Prog::from_node(Node::Step {
            label: label.into(),
            outcomes: Rc::new(outcomes),
        })
    }

    /// Reads a value off the state without changing it.
    pub fn read(label: impl Into<String>, f: impl Fn(&S) -> Value + 'static) -> Self {
        Prog::step(label, move |s| vec![(f(s), s.clone())])
    }

    pub fn rec(label: impl Into<String>, body: Functional<S>, arg: Value) -> Self {
        Prog::from_node(Node::Rec {
            label: label.into(),
            body,
            arg,
        })
    }

    /// One-line description of the outermost constructor.
    pub fn describe(&self) -> String {
        match self.node() {
            Node::Ret { value, sym } => match sym {
                Some(s) => format!("ret({s})"),
                None => format!("ret({value})"),
            },
            Node::Bind { first, rest } => format!("x ← {};; {}", first.describe(), rest.label()),
            Node::Choice(l, r) => format!("choice({}, {})", l.describe(), r.describe()),
            Node::Assume { label, .. } => format!("assume({label})"),
            Node::AssumePure { label, .. } => format!("assume'({label})"),
            Node::Any(d) => format!("any(<{} values>)", d.len()),
            Node::Update { label, .. } => format!("update({label})"),
            Node::Step { label, .. } => label.clone(),
            Node::Rec { label, arg, .. } => format!("{label}({arg})"),
            Node::Call(site) => format!("W({})", site.arg()),
        }
    }
}

impl<S: State> fmt::Debug for Prog<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Prog[{}]", self.describe())
    }
}
