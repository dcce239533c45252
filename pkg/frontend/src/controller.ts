import type { SessionApi } from './api'
import type { Command, SessionStateJson } from './types'

export interface ControllerEvents {
    onState: (state: SessionStateJson) => void
    onError: (message: string) => void
}

/**
 * Owns one session's lifecycle on the client: sends commands while edits are
 * allowed, polls state every 500 ms while the server iterates, and stops
 * polling once the session is awaiting edits or finalized.  The view it
 * feeds is pure render state; reloading and re-fetching reproduces it.
 */
export class SessionController {
    state: SessionStateJson | null = null
    private timer: ReturnType<typeof setTimeout> | null = null

    constructor(
        private api: SessionApi,
        private events: ControllerEvents,
        private pollMs = 500,
    ) {}

    get phase(): string {
        return this.state ? this.state.state : 'none'
    }

    get sessionId(): string | null {
        return this.state ? this.state.session_id : null
    }

    get canEdit(): boolean {
        return this.state !== null && this.state.state === 'awaiting_edits'
    }

    async open(ruleId: string, kInit: number, seed = 0): Promise<void> {
        try {
            const created = await this.api.createSession(ruleId, kInit, seed)
            this.accept(created.state)
        } catch (err) {
            this.events.onError(String(err))
        }
    }

    async send(command: Command): Promise<void> {
        if (!this.state) return
        if (!this.canEdit) {
            this.events.onError('session is not awaiting edits')
            return
        }
        try {
            const next = await this.api.sendCommand(this.state.session_id, command)
            this.accept(next)
        } catch (err) {
            this.events.onError(String(err))
            await this.refresh()
        }
    }

    async refresh(): Promise<void> {
        if (!this.state) return
        try {
            this.accept(await this.api.getState(this.state.session_id))
        } catch (err) {
            this.events.onError(String(err))
        }
    }

    stop(): void {
        if (this.timer !== null) {
            clearTimeout(this.timer)
            this.timer = null
        }
    }

    private accept(state: SessionStateJson): void {
        this.state = state
        this.events.onState(state)
        this.stop()
        if (state.state === 'iterating') {
            this.timer = setTimeout(() => void this.refresh(), this.pollMs)
        }
    }
}
