import type { SessionStateJson, SigmaTablesJson } from './types'

export type PanelCommand =
    | { kind: 'delete'; k: number }
    | { kind: 'set_median'; k: number; x: number }
    | { kind: 'continue' }
    | { kind: 'finalize' }

/** Validate the set-median form inputs; returns an error string or null. */
export function validateSetMedian(kRaw: string, xRaw: string, liveCount: number): string | null {
    const k = Number(kRaw)
    if (!Number.isInteger(k) || k < 1 || k > liveCount + 1) {
        return `cluster index must be 1..${liveCount + 1}`
    }
    const x = Number(xRaw)
    if (xRaw.trim() === '' || Number.isNaN(x)) {
        return 'median must be a number'
    }
    return null
}

export function sigmaTablesText(tables: SigmaTablesJson): string {
    const lines = ['k    beta     median   sigma_mdl  sigma_n    sigma_L']
    for (const c of tables.components) {
        lines.push(
            `${String(c.index).padEnd(4)} ${c.beta.toFixed(4)}   ${c.median.toFixed(4)}   ` +
                `${c.sigma_model.toFixed(4)}     ${c.sigma_normal.toFixed(4)}     ${c.sigma_laplace.toFixed(4)}`,
        )
    }
    lines.push(
        `rule sigma_model=${tables.rule_sigma_model.toFixed(4)} ` +
            `sigma_normal=${tables.rule_sigma_normal.toFixed(4)} ` +
            `sigma_laplace=${tables.rule_sigma_laplace.toFixed(4)}`,
    )
    return lines.join('\n')
}

export class CommandPanel {
    readonly root: HTMLDivElement
    private status: HTMLSpanElement
    private modelPre: HTMLPreElement
    private sigmaPre: HTMLPreElement
    private buttons: HTMLButtonElement[] = []
    private kInput: HTMLInputElement
    private xInput: HTMLInputElement
    private toast: HTMLDivElement

    constructor(private onCommand: (cmd: PanelCommand) => void) {
        this.root = document.createElement('div')
        this.root.className = 'panel'

        this.status = document.createElement('span')
        this.status.className = 'badge'
        this.root.appendChild(this.status)

        const controls = document.createElement('div')
        controls.className = 'controls'
        this.kInput = this.numberInput('k', '1')
        this.xInput = this.numberInput('median', '')
        controls.append(this.kInput, this.xInput)
        controls.appendChild(this.button('set median', () => {
            this.onCommand({
                kind: 'set_median',
                k: Number(this.kInput.value),
                x: Number(this.xInput.value),
            })
        }))
        controls.appendChild(this.button('delete k', () => {
            this.onCommand({ kind: 'delete', k: Number(this.kInput.value) })
        }))
        controls.appendChild(this.button('continue', () => this.onCommand({ kind: 'continue' })))
        controls.appendChild(this.button('finalize', () => this.onCommand({ kind: 'finalize' })))
        this.root.appendChild(controls)

        this.toast = document.createElement('div')
        this.toast.className = 'toast'
        this.root.appendChild(this.toast)

        this.modelPre = document.createElement('pre')
        this.sigmaPre = document.createElement('pre')
        this.root.append(this.modelPre, this.sigmaPre)
    }

    private numberInput(placeholder: string, value: string): HTMLInputElement {
        const input = document.createElement('input')
        input.placeholder = placeholder
        input.value = value
        input.size = 8
        return input
    }

    private button(label: string, onClick: () => void): HTMLButtonElement {
        const b = document.createElement('button')
        b.textContent = label
        b.addEventListener('click', onClick)
        this.buttons.push(b)
        return b
    }

    showError(message: string): void {
        this.toast.textContent = message
    }

    render(state: SessionStateJson): void {
        this.status.textContent = `${state.rule_id} · ${state.state} · N=${state.n_samples}`
        const editable = state.state === 'awaiting_edits'
        this.buttons.forEach((b) => (b.disabled = !editable))
        this.toast.textContent = ''
        const live = state.model.components
            .map((c, i) => ({ ...c, k: i + 1 }))
            .filter((c) => !c.deleted)
        this.modelPre.textContent = live
            .map((c) => `k=${c.k} median=${c.median.toFixed(4)} lambda=${c.lambda.toFixed(4)} beta=${c.beta.toFixed(3)}`)
            .join('\n')
        this.sigmaPre.textContent = state.sigma_tables ? sigmaTablesText(state.sigma_tables) : ''
    }
}
