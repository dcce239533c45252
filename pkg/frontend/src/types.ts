// JSON shapes served by the session service; the UI renders these verbatim
// and never refits anything client-side.

export type SessionPhase = 'iterating' | 'awaiting_edits' | 'finalized'

export interface EntropyConfigJson {
    algorithm: 'shannon' | 'min'
    symbol: 'bit' | 'octet'
    normalized: boolean
    length_corrected: boolean
}

export interface ComponentJson {
    median: number
    lambda: number
    beta: number
    deleted: boolean
}

export interface MixtureModelJson {
    components: ComponentJson[]
    mml: number
    iterations: number
    converged: boolean
}

export interface HistogramJson {
    edges: number[]
    counts: number[]
}

export interface ComponentSigmaJson {
    index: number
    beta: number
    median: number
    lambda: number
    mean: number
    sigma_model: number
    sigma_normal: number
    sigma_laplace: number
}

export interface SigmaTablesJson {
    components: ComponentSigmaJson[]
    rule_sigma_model: number
    rule_sigma_normal: number
    rule_sigma_laplace: number
}

export interface SessionStateJson {
    session_id: string
    rule_id: string
    state: SessionPhase
    n_samples: number
    config: EntropyConfigJson
    histogram: HistogramJson
    model: MixtureModelJson
    sigma_tables: SigmaTablesJson | null
    edits_since_convergence: number
}

export interface SessionCreatedJson {
    session_id: string
    created: boolean
    state: SessionStateJson
}

export interface RuleInfoJson {
    rule_id: string
    alarms: number
}

export type Command =
    | { op: 'setcl'; k: number; median: number }
    | { op: 'delcl'; clusters: number[] }
    | { op: 'pickcl'; x: number }
    | { op: 'cont' }
