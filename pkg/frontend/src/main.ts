import { SessionApi } from './api'
import { SessionController } from './controller'
import { HistogramView } from './histogram'
import { CommandPanel } from './panel'
import type { SessionStateJson } from './types'

const api = new SessionApi('')

function h<K extends keyof HTMLElementTagNameMap>(tag: K, text = ''): HTMLElementTagNameMap[K] {
    const el = document.createElement(tag)
    if (text) el.textContent = text
    return el
}

function boot(root: HTMLElement): void {
    root.appendChild(h('h1', 'attack-vector clusters'))

    const picker = h('div')
    const ruleSelect = document.createElement('select')
    const kInput = document.createElement('input')
    kInput.value = '2'
    kInput.size = 4
    const openBtn = h('button', 'open session')
    picker.append(ruleSelect, kInput, openBtn)
    root.appendChild(picker)

    const panel = new CommandPanel((cmd) => {
        if (cmd.kind === 'delete') void controller.send({ op: 'delcl', clusters: [cmd.k] })
        else if (cmd.kind === 'set_median') void controller.send({ op: 'setcl', k: cmd.k, median: cmd.x })
        else void controller.send({ op: 'cont' })
    })
    const histogram = new HistogramView((x) => void controller.send({ op: 'pickcl', x }))

    const controller = new SessionController(api, {
        onState: (state: SessionStateJson) => {
            histogram.update(
                state.histogram,
                state.model.components,
                state.n_samples,
                state.state === 'awaiting_edits',
            )
            panel.render(state)
        },
        onError: (message) => panel.showError(message),
    })

    root.append(histogram.root, panel.root)

    api.listRules()
        .then((rules) => {
            for (const rule of rules) {
                const opt = document.createElement('option')
                opt.value = rule.rule_id
                opt.textContent = `${rule.rule_id} (${rule.alarms})`
                ruleSelect.appendChild(opt)
            }
        })
        .catch((err) => panel.showError(String(err)))

    openBtn.addEventListener('click', () => {
        void controller.open(ruleSelect.value, Number(kInput.value) || 1)
    })
}

boot(document.getElementById('app') as HTMLElement)
